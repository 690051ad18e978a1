#include "babylon/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "babylon/text.hpp"

namespace babylon {

std::map<std::string, std::vector<int>> Grouping::groups() const {
    std::map<std::string, std::vector<int>> out;
    for (const auto& [line_id, key] : assignment) out[key].push_back(line_id);
    return out;  // member lists ascending: assignment iterates in line order
}

std::size_t Grouping::group_count() const {
    std::set<std::string> keys;
    for (const auto& [line_id, key] : assignment) keys.insert(key);
    return keys.size();
}

namespace {

void require_same_cover(const std::map<int, std::string>& a, const std::map<int, std::string>& b) {
    if (a.size() != b.size())
        throw CoverageError("id covers differ: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + " lines");
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end(); ++ia, ++ib) {
        if (ia->first != ib->first)
            throw CoverageError("id covers differ at line " + std::to_string(ia->first));
    }
}

double zero_guarded(double numerator, double denominator) {
    return denominator > 0.0 ? numerator / denominator : 0.0;
}

double harmonic_mean(double p, double r) {
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

} // namespace

double grouping_accuracy(const Grouping& parsed, const Grouping& truth) {
    require_same_cover(parsed.assignment, truth.assignment);
    auto parsed_groups = parsed.groups();
    auto truth_groups = truth.groups();

    std::size_t correct = 0;
    for (const auto& [line_id, key] : parsed.assignment) {
        const auto& parsed_members = parsed_groups.at(key);
        const auto& truth_members = truth_groups.at(truth.assignment.at(line_id));
        if (parsed_members == truth_members) ++correct;
    }
    return zero_guarded(static_cast<double>(correct),
                        static_cast<double>(parsed.assignment.size()));
}

double parsing_accuracy(const std::map<int, std::string>& parsed_templates,
                        const std::map<int, std::string>& truth_templates) {
    require_same_cover(parsed_templates, truth_templates);
    std::size_t correct = 0;
    for (const auto& [line_id, text] : parsed_templates) {
        if (canonical_whitespace(text) == canonical_whitespace(truth_templates.at(line_id)))
            ++correct;
    }
    return zero_guarded(static_cast<double>(correct),
                        static_cast<double>(parsed_templates.size()));
}

FgaResult fga(const Grouping& parsed, const Grouping& truth) {
    require_same_cover(parsed.assignment, truth.assignment);
    auto parsed_groups = parsed.groups();
    auto truth_groups = truth.groups();

    std::set<std::vector<int>> truth_member_sets;
    for (const auto& [key, members] : truth_groups) truth_member_sets.insert(members);

    std::size_t n_c = 0;
    for (const auto& [key, members] : parsed_groups)
        if (truth_member_sets.count(members)) ++n_c;

    FgaResult result;
    result.n_g = truth_groups.size();
    result.n_p = parsed_groups.size();
    result.n_c = n_c;
    result.p_ga = zero_guarded(static_cast<double>(n_c), static_cast<double>(result.n_p));
    result.r_ga = zero_guarded(static_cast<double>(n_c), static_cast<double>(result.n_g));
    result.f1 = harmonic_mean(result.p_ga, result.r_ga);
    return result;
}

FtaResult fta_pta_rta(const std::map<int, std::string>& parsed_templates,
                      const Grouping& parsed, const Grouping& truth) {
    require_same_cover(parsed.assignment, truth.assignment);
    require_same_cover(parsed_templates, truth.assignment);
    auto parsed_groups = parsed.groups();
    auto truth_groups = truth.groups();

    // truth member set -> canonical template text (the truth group key)
    std::map<std::vector<int>, std::string> truth_by_members;
    for (const auto& [key, members] : truth_groups)
        truth_by_members[members] = canonical_whitespace(key);

    std::size_t correct = 0;
    for (const auto& [key, members] : parsed_groups) {
        auto it = truth_by_members.find(members);
        if (it == truth_by_members.end()) continue;
        const std::string text = canonical_whitespace(parsed_templates.at(members.front()));
        if (text == it->second) ++correct;
    }

    FtaResult result;
    result.pta = zero_guarded(static_cast<double>(correct),
                              static_cast<double>(parsed_groups.size()));
    result.rta = zero_guarded(static_cast<double>(correct),
                              static_cast<double>(truth_groups.size()));
    result.fta = harmonic_mean(result.pta, result.rta);
    return result;
}

GranularityResult granularity_distances(const Grouping& parsed,
                                        const std::map<int, std::string>& parsed_templates,
                                        const Grouping& truth) {
    require_same_cover(parsed.assignment, truth.assignment);
    auto parsed_groups = parsed.groups();
    auto truth_groups = truth.groups();

    // Split phase: each parsed group fractures into its truth-side pieces.
    std::int64_t splits = 0;
    for (const auto& [key, members] : parsed_groups) {
        std::set<std::string> pieces;
        for (int line_id : members) pieces.insert(truth.assignment.at(line_id));
        splits += static_cast<std::int64_t>(pieces.size()) - 1;
    }

    // Merge phase: each truth group is reassembled from parsed-derived pieces.
    std::int64_t merges = 0;
    for (const auto& [key, members] : truth_groups) {
        std::set<std::string> pieces;
        for (int line_id : members) pieces.insert(parsed.assignment.at(line_id));
        merges += static_cast<std::int64_t>(pieces.size()) - 1;
    }

    GranularityResult result;
    result.ggd = splits + merges;

    // Template fixes: a post-transformation group needs one fix unless some
    // parsed group intersecting it already carries the correct text. A
    // parsed group's text is the text of its lowest-numbered member, as in
    // fta_pta_rta.
    std::map<std::string, std::string> parsed_group_text;
    for (const auto& [key, members] : parsed_groups) {
        auto it = parsed_templates.find(members.front());
        if (it != parsed_templates.end())
            parsed_group_text[key] = canonical_whitespace(it->second);
    }

    std::int64_t fixes = 0;
    for (const auto& [key, members] : truth_groups) {
        const std::string want = canonical_whitespace(key);
        bool satisfied = false;
        for (int line_id : members) {
            auto it = parsed_group_text.find(parsed.assignment.at(line_id));
            if (it != parsed_group_text.end() && it->second == want) {
                satisfied = true;
                break;
            }
        }
        if (!satisfied) ++fixes;
    }
    result.pgd = result.ggd + fixes;
    return result;
}

MetricsReport evaluate(const std::vector<ParseOutcome>& outcomes, const Dataset& truth) {
    if (!truth.has_truth()) throw MissingTruthError();

    Grouping parsed;
    Grouping truth_grouping;
    std::map<int, std::string> truth_templates;

    for (const auto& entry : *truth.truth) {
        truth_grouping.assignment[entry.line_id] = entry.event_template;
        truth_templates[entry.line_id] = entry.event_template;
    }

    // Final template per cluster: text carried by the last outcome that
    // touched the cluster (merges rewrite the template mid-stream).
    std::map<ClusterId, std::string> final_template;
    for (const auto& outcome : outcomes) {
        parsed.assignment[outcome.record.line_id] = std::to_string(outcome.cluster_id);
        final_template[outcome.cluster_id] = outcome.template_text;
    }
    std::map<int, std::string> parsed_templates;
    for (const auto& outcome : outcomes)
        parsed_templates[outcome.record.line_id] = final_template.at(outcome.cluster_id);

    MetricsReport report;
    if (outcomes.empty() && truth.truth->empty()) return report;

    report.ga = grouping_accuracy(parsed, truth_grouping);
    report.pa = parsing_accuracy(parsed_templates, truth_templates);

    FgaResult f = fga(parsed, truth_grouping);
    report.fga = f.f1;
    report.n_g = f.n_g;
    report.n_p = f.n_p;
    report.n_c = f.n_c;

    FtaResult t = fta_pta_rta(parsed_templates, parsed, truth_grouping);
    report.pta = t.pta;
    report.rta = t.rta;
    report.fta = t.fta;

    GranularityResult g = granularity_distances(parsed, parsed_templates, truth_grouping);
    report.ggd = g.ggd;
    report.pgd = g.pgd;
    return report;
}

std::string render_metrics_table(const MetricsReport& report) {
    char buffer[256];
    std::ostringstream out;
    out << "     GA      PA     FGA     FTA     GGD     PGD\n";
    std::snprintf(buffer, sizeof(buffer), "%7.3f %7.3f %7.3f %7.3f %7lld %7lld\n",
                  report.ga, report.pa, report.fga, report.fta,
                  static_cast<long long>(report.ggd), static_cast<long long>(report.pgd));
    out << buffer;
    return out.str();
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::json doc;
    doc["ga"] = report.ga;
    doc["pa"] = report.pa;
    doc["fga"] = report.fga;
    doc["fta"] = report.fta;
    doc["pta"] = report.pta;
    doc["rta"] = report.rta;
    doc["ggd"] = report.ggd;
    doc["pgd"] = report.pgd;
    doc["n_g"] = report.n_g;
    doc["n_p"] = report.n_p;
    doc["n_c"] = report.n_c;
    return doc.dump(2) + "\n";
}

} // namespace babylon
