#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "babylon/errors.hpp"
#include "babylon/ingest.hpp"
#include "babylon/pipeline.hpp"

namespace babylon {

/// Total assignment of line ids to group keys. Parsed groupings key by
/// cluster id; truth groupings key by ground-truth template text.
struct Grouping {
    std::map<int, std::string> assignment;  // line_id -> group key

    std::map<std::string, std::vector<int>> groups() const;
    std::size_t group_count() const;
};

struct MetricsReport {
    double ga = 0.0;
    double pa = 0.0;
    double fga = 0.0;
    double fta = 0.0;
    double pta = 0.0;
    double rta = 0.0;
    std::int64_t ggd = 0;
    std::int64_t pgd = 0;
    std::size_t n_g = 0;  // truth groups
    std::size_t n_p = 0;  // parsed groups
    std::size_t n_c = 0;  // parsed groups whose member set equals a truth group's
};

/// Fraction of messages whose parsed group's member set equals its truth
/// group's member set. Throws CoverageError when the id covers differ.
double grouping_accuracy(const Grouping& parsed, const Grouping& truth);

/// Fraction of messages whose parsed template text equals the ground-truth
/// template exactly after whitespace canonicalization.
double parsing_accuracy(const std::map<int, std::string>& parsed_templates,
                        const std::map<int, std::string>& truth_templates);

struct FgaResult {
    double p_ga = 0.0;  // N_c / N_p
    double r_ga = 0.0;  // N_c / N_g
    double f1 = 0.0;    // harmonic mean, 0 when degenerate
    std::size_t n_g = 0, n_p = 0, n_c = 0;
};

FgaResult fga(const Grouping& parsed, const Grouping& truth);

struct FtaResult {
    double pta = 0.0;
    double rta = 0.0;
    double fta = 0.0;
};

/// A parsed group's template is correct iff the member set equals a truth
/// group's member set AND the text matches that group's template exactly
/// (whitespace-canonical). A parsed group's text is the text of its
/// lowest-numbered member.
FtaResult fta_pta_rta(const std::map<int, std::string>& parsed_templates,
                      const Grouping& parsed, const Grouping& truth);

struct GranularityResult {
    std::int64_t ggd = 0;
    std::int64_t pgd = 0;
};

/// Group granularity distance: the minimum number of split/merge operations
/// transforming the parsed partition into the truth partition (a split
/// divides one group into two, a merge unites two). PGD adds one
/// template-fix operation per truth group for which no intersecting parsed
/// group carries the correct template text.
GranularityResult granularity_distances(const Grouping& parsed,
                                        const std::map<int, std::string>& parsed_templates,
                                        const Grouping& truth);

/// Builds groupings and template maps from a parse run and ground truth.
/// Each line's parsed template is the final template of its cluster (the
/// text carried by the last outcome that touched that cluster).
MetricsReport evaluate(const std::vector<ParseOutcome>& outcomes, const Dataset& truth);

/// Fixed-width table with GA, PA, FGA, FTA, GGD, PGD columns.
std::string render_metrics_table(const MetricsReport& report);
std::string metrics_to_json(const MetricsReport& report);

} // namespace babylon
