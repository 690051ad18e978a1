#include "babylon/parse_core.hpp"

#include <algorithm>
#include <cassert>

#include <nlohmann/json.hpp>

#include "babylon/text.hpp"

namespace babylon {

namespace {
constexpr const char* kWildcard = "<*>";
}

// ---------------------------------------------------------------------------
// SyntaxTemplate

bool SyntaxTemplate::matches(const std::vector<std::string>& log_tokens) const {
    if (log_tokens.size() != tokens_.size()) return false;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!tokens_[i].wildcard && tokens_[i].literal != log_tokens[i]) return false;
    }
    return true;
}

std::size_t SyntaxTemplate::literal_overlap(const std::vector<std::string>& log_tokens) const {
    if (log_tokens.size() != tokens_.size()) return 0;
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!tokens_[i].wildcard && tokens_[i].literal == log_tokens[i]) ++overlap;
    }
    return overlap;
}

std::size_t SyntaxTemplate::literal_count() const {
    std::size_t n = 0;
    for (const auto& t : tokens_)
        if (!t.wildcard) ++n;
    return n;
}

std::string SyntaxTemplate::key() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens_[i].wildcard ? kWildcard : tokens_[i].literal;
    }
    return out;
}

// ---------------------------------------------------------------------------
// LogTemplate

LogTemplate::LogTemplate(std::string_view text) : text_(canonical_whitespace(text)) {
    if (text_.empty()) throw EmptyContentError();
}

std::vector<std::string> LogTemplate::tokens() const {
    return tokenize(text_);
}

// ---------------------------------------------------------------------------
// LogCluster

bool LogCluster::holds_arity(std::size_t arity) const {
    auto it = syntax_templates.find(arity);
    return it != syntax_templates.end() && !it->second.empty();
}

bool LogCluster::has_member(const MemberRef& ref) const {
    return std::find(member_ids.begin(), member_ids.end(), ref) != member_ids.end();
}

const SyntaxTemplate* LogCluster::best_aligned(const std::vector<std::string>& log_tokens) const {
    auto it = syntax_templates.find(log_tokens.size());
    if (it == syntax_templates.end()) return nullptr;
    const SyntaxTemplate* best = nullptr;
    std::size_t best_overlap = 0;
    for (const auto& syntax : it->second) {
        std::size_t overlap = syntax.literal_overlap(log_tokens);
        if (!best || overlap > best_overlap) {
            best = &syntax;
            best_overlap = overlap;
        }
    }
    return best;
}

std::size_t LogCluster::best_overlap(const std::vector<std::string>& log_tokens) const {
    const SyntaxTemplate* best = best_aligned(log_tokens);
    return best ? best->literal_overlap(log_tokens) : 0;
}

// ---------------------------------------------------------------------------
// ParseTree

struct ParseTree::Node {
    std::map<std::string, std::unique_ptr<Node>> literal_children;
    std::unique_ptr<Node> wildcard_child;
    std::set<ClusterId> cluster_refs;

    std::unique_ptr<Node> clone() const {
        auto copy = std::make_unique<Node>();
        copy->cluster_refs = cluster_refs;
        for (const auto& [token, child] : literal_children)
            copy->literal_children.emplace(token, child->clone());
        if (wildcard_child) copy->wildcard_child = wildcard_child->clone();
        return copy;
    }
};

ParseTree::ParseTree() : root_(std::make_unique<Node>()) {}

ParseTree::~ParseTree() = default;
ParseTree::ParseTree(ParseTree&&) noexcept = default;
ParseTree& ParseTree::operator=(ParseTree&&) noexcept = default;

ParseTree::ParseTree(const ParseTree& other) : root_(other.root_->clone()) {}

ParseTree& ParseTree::operator=(const ParseTree& other) {
    if (this != &other) root_ = other.root_->clone();
    return *this;
}

void ParseTree::insert(const SyntaxTemplate& syntax, ClusterId id) {
    Node* node = root_.get();
    for (const auto& token : syntax.tokens()) {
        if (token.wildcard) {
            if (!node->wildcard_child) node->wildcard_child = std::make_unique<Node>();
            node = node->wildcard_child.get();
        } else {
            auto& child = node->literal_children[token.literal];
            if (!child) child = std::make_unique<Node>();
            node = child.get();
        }
    }
    node->cluster_refs.insert(id);
}

bool ParseTree::contains(const SyntaxTemplate& syntax, ClusterId id) const {
    const Node* node = root_.get();
    for (const auto& token : syntax.tokens()) {
        if (token.wildcard) {
            node = node->wildcard_child.get();
        } else {
            auto it = node->literal_children.find(token.literal);
            node = it == node->literal_children.end() ? nullptr : it->second.get();
        }
        if (!node) return false;
    }
    return node->cluster_refs.count(id) > 0;
}

std::set<ClusterId> ParseTree::reachable(const std::vector<std::string>& tokens) const {
    std::set<ClusterId> out;
    // Iterative frontier walk: both the literal child and the wildcard child
    // are explored at every step.
    std::vector<const Node*> frontier = {root_.get()};
    for (const auto& token : tokens) {
        std::vector<const Node*> next;
        for (const Node* node : frontier) {
            auto it = node->literal_children.find(token);
            if (it != node->literal_children.end()) next.push_back(it->second.get());
            if (node->wildcard_child) next.push_back(node->wildcard_child.get());
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    for (const Node* node : frontier) {
        out.insert(node->cluster_refs.begin(), node->cluster_refs.end());
    }
    return out;
}

std::set<ClusterId> ParseTree::all_refs() const {
    std::set<ClusterId> out;
    std::vector<const Node*> stack = {root_.get()};
    while (!stack.empty()) {
        const Node* node = stack.back();
        stack.pop_back();
        out.insert(node->cluster_refs.begin(), node->cluster_refs.end());
        for (const auto& [token, child] : node->literal_children) stack.push_back(child.get());
        if (node->wildcard_child) stack.push_back(node->wildcard_child.get());
    }
    return out;
}

std::size_t ParseTree::node_count() const {
    std::size_t count = 0;
    std::vector<const Node*> stack = {root_.get()};
    while (!stack.empty()) {
        const Node* node = stack.back();
        stack.pop_back();
        ++count;
        for (const auto& [token, child] : node->literal_children) stack.push_back(child.get());
        if (node->wildcard_child) stack.push_back(node->wildcard_child.get());
    }
    return count;
}

void ParseTree::clear() {
    root_ = std::make_unique<Node>();
}

// ---------------------------------------------------------------------------
// Template alignment

namespace {

struct TemplatePiece {
    bool variable = false;
    std::string literal;  // valid when !variable
};

std::vector<TemplatePiece> template_pieces(const LogTemplate& log_template) {
    std::vector<TemplatePiece> pieces;
    for (const auto& token : log_template.tokens()) {
        if (token.find(kWildcard) != std::string::npos) {
            pieces.push_back({true, {}});
        } else {
            pieces.push_back({false, token});
        }
    }
    return pieces;
}

} // namespace

SyntaxTemplate derive_syntax_template(const LogTemplate& log_template,
                                      const std::vector<std::string>& tokens) {
    const auto pieces = template_pieces(log_template);
    const std::size_t m = pieces.size();
    const std::size_t n = tokens.size();
    if (m == 0 || n == 0)
        throw AlignmentError("cannot align \"" + log_template.text() + "\" to empty input");

    // feasible[i][j]: pieces[i..) can consume tokens[j..). A variable piece
    // consumes one or more whole tokens; a literal piece consumes exactly
    // the equal token.
    std::vector<std::vector<char>> feasible(m + 1, std::vector<char>(n + 1, 0));
    feasible[m][n] = 1;
    for (std::size_t ii = m; ii-- > 0;) {
        if (pieces[ii].variable) {
            // any feasible continuation after consuming >= 1 token
            char suffix_any = 0;
            for (std::size_t j = n; j-- > 0;) {
                suffix_any = static_cast<char>(suffix_any | feasible[ii + 1][j + 1]);
                feasible[ii][j] = suffix_any;
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                feasible[ii][j] =
                    static_cast<char>(tokens[j] == pieces[ii].literal && feasible[ii + 1][j + 1]);
            }
        }
    }
    if (!feasible[0][0])
        throw AlignmentError("template \"" + log_template.text() +
                             "\" does not align to: " + join_tokens(tokens));

    // Non-greedy walk: each variable takes the fewest tokens that keep the
    // remaining pieces alignable.
    std::vector<SyntaxToken> marks;
    marks.reserve(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!pieces[i].variable) {
            marks.push_back(SyntaxToken::lit(tokens[j]));
            ++j;
        } else {
            marks.push_back(SyntaxToken::any());
            ++j;
            while (!feasible[i + 1][j]) {
                marks.push_back(SyntaxToken::any());
                ++j;
            }
        }
    }
    assert(j == n);
    return SyntaxTemplate(std::move(marks));
}

LogTemplate template_from_mask(const SyntaxTemplate& mask) {
    std::vector<std::string> parts;
    bool last_wildcard = false;
    for (const auto& token : mask.tokens()) {
        if (token.wildcard) {
            if (!last_wildcard) parts.emplace_back(kWildcard);
            last_wildcard = true;
        } else {
            parts.push_back(token.literal);
            last_wildcard = false;
        }
    }
    return LogTemplate(join_tokens(parts));
}

std::optional<LogTemplate> check_merge(const std::vector<std::string>& tokens,
                                       const LogCluster& cluster) {
    const SyntaxTemplate* base = cluster.best_aligned(tokens);
    if (!base) return std::nullopt;

    std::vector<SyntaxToken> merged;
    merged.reserve(tokens.size());
    std::size_t survivors = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& mark = base->tokens()[i];
        if (!mark.wildcard && mark.literal == tokens[i]) {
            merged.push_back(mark);
            ++survivors;
        } else {
            merged.push_back(SyntaxToken::any());
        }
    }
    if (survivors == 0) return std::nullopt;
    if (survivors * 2 < tokens.size()) return std::nullopt;  // < half the arity
    return template_from_mask(SyntaxTemplate(std::move(merged)));
}

// ---------------------------------------------------------------------------
// ParserState

const LogCluster* ParserState::find_cluster(ClusterId id) const {
    auto it = clusters_.find(id);
    return it == clusters_.end() ? nullptr : &it->second;
}

LogCluster* ParserState::find_cluster(ClusterId id) {
    auto it = clusters_.find(id);
    return it == clusters_.end() ? nullptr : &it->second;
}

MatchResult ParserState::search(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) return MatchResult::none();

    std::vector<ClusterId> strict;
    std::vector<std::pair<std::size_t, ClusterId>> loose;  // (overlap, id)
    for (ClusterId id : tree_.reachable(tokens)) {          // set: ascending id
        const LogCluster* cluster = find_cluster(id);
        if (!cluster) continue;  // dangling refs are reported by the audit
        if (!cluster->holds_arity(tokens.size())) continue;

        bool any_strict = false;
        for (const auto& syntax : cluster->syntax_templates.at(tokens.size())) {
            if (syntax.matches(tokens)) { any_strict = true; break; }
        }
        if (any_strict)
            strict.push_back(id);
        else
            loose.emplace_back(cluster->best_overlap(tokens), id);
    }

    if (!strict.empty()) return MatchResult::strict(strict.front());
    if (!loose.empty()) {
        std::stable_sort(loose.begin(), loose.end(), [](const auto& a, const auto& b) {
            return a.first > b.first;  // overlap desc; stable keeps id order
        });
        std::vector<ClusterId> ids;
        ids.reserve(loose.size());
        for (const auto& [overlap, id] : loose) ids.push_back(id);
        return MatchResult::loose(std::move(ids));
    }
    return MatchResult::none();
}

std::vector<ClusterId> ParserState::find_loose_matches(const std::vector<std::string>& tokens) const {
    std::vector<std::pair<std::size_t, ClusterId>> scored;
    for (const auto& [id, cluster] : clusters_) {
        if (!cluster.holds_arity(tokens.size())) continue;
        scored.emplace_back(cluster.best_overlap(tokens), id);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<ClusterId> out;
    out.reserve(scored.size());
    for (const auto& [overlap, id] : scored) out.push_back(id);
    return out;
}

void ParserState::update_tree(const SyntaxTemplate& syntax, ClusterId id) {
    tree_.insert(syntax, id);
}

ClusterId ParserState::create_cluster(const LogTemplate& log_template, const LogRecord& record,
                                      const SyntaxTemplate& syntax) {
    ClusterId id = next_id_++;
    LogCluster cluster;
    cluster.cluster_id = id;
    cluster.log_template = log_template;
    cluster.syntax_templates[syntax.arity()].push_back(syntax);
    cluster.member_ids.push_back({record.source, record.line_id});
    cluster.representative_content = record.content;
    cluster.representative_tokens = record.tokens;
    clusters_.emplace(id, std::move(cluster));

    member_tokens_[{record.source, record.line_id}] = record.tokens;
    tree_.insert(syntax, id);
    pool_[log_template.text()] = id;
    return id;
}

bool ParserState::append_member(ClusterId id, const LogRecord& record) {
    LogCluster* cluster = find_cluster(id);
    if (!cluster) return false;
    MemberRef ref{record.source, record.line_id};
    if (cluster->has_member(ref)) return false;
    cluster->member_ids.push_back(ref);
    member_tokens_[ref] = record.tokens;
    return true;
}

void ParserState::add_syntax(ClusterId id, const SyntaxTemplate& syntax) {
    LogCluster* cluster = find_cluster(id);
    if (!cluster) return;
    auto& list = cluster->syntax_templates[syntax.arity()];
    if (std::find(list.begin(), list.end(), syntax) == list.end()) list.push_back(syntax);
    tree_.insert(syntax, id);
}

bool ParserState::replace_template(ClusterId id, const LogTemplate& next) {
    LogCluster* cluster = find_cluster(id);
    if (!cluster) return false;
    auto pooled = pool_.find(next.text());
    if (pooled != pool_.end() && pooled->second != id) return false;

    auto old = pool_.find(cluster->log_template.text());
    if (old != pool_.end() && old->second == id) pool_.erase(old);
    cluster->log_template = next;
    pool_[next.text()] = id;
    return true;
}

std::optional<ClusterId> ParserState::pool_lookup(const std::string& template_text) const {
    auto it = pool_.find(template_text);
    if (it == pool_.end()) return std::nullopt;
    return it->second;
}

const std::vector<std::string>* ParserState::member_tokens(const MemberRef& ref) const {
    auto it = member_tokens_.find(ref);
    return it == member_tokens_.end() ? nullptr : &it->second;
}

std::vector<AuditViolation> ParserState::audit_consistency() const {
    std::vector<AuditViolation> violations;
    auto flag = [&](std::string locator, std::string detail) {
        violations.push_back({std::move(locator), std::move(detail)});
    };

    for (ClusterId id : tree_.all_refs()) {
        if (!clusters_.count(id))
            flag("tree", "references missing cluster " + std::to_string(id));
    }

    for (const auto& [id, cluster] : clusters_) {
        const std::string locator = "cluster " + std::to_string(id);
        if (cluster.cluster_id != id) flag(locator, "id field disagrees with registry key");

        for (const auto& [arity, list] : cluster.syntax_templates) {
            for (const auto& syntax : list) {
                if (syntax.arity() != arity)
                    flag(locator, "syntax template \"" + syntax.key() +
                                      "\" stored under arity key " + std::to_string(arity));
                if (!tree_.contains(syntax, id))
                    flag(locator, "syntax template \"" + syntax.key() + "\" unreachable in tree");
            }
        }

        std::set<MemberRef> seen;
        for (const auto& ref : cluster.member_ids) {
            if (!seen.insert(ref).second)
                flag(locator, "duplicate member " + ref.source + ":" + std::to_string(ref.line_id));
            if (const auto* tokens = member_tokens(ref)) {
                bool matched = false;
                auto it = cluster.syntax_templates.find(tokens->size());
                if (it != cluster.syntax_templates.end()) {
                    for (const auto& syntax : it->second) {
                        if (syntax.matches(*tokens)) { matched = true; break; }
                    }
                }
                if (!matched)
                    flag(locator, "member " + ref.source + ":" + std::to_string(ref.line_id) +
                                      " matches no stored syntax template");
            }
        }

        auto pooled = pool_.find(cluster.log_template.text());
        if (pooled == pool_.end() || pooled->second != id)
            flag(locator, "template \"" + cluster.log_template.text() +
                              "\" is not pooled to this cluster");
    }

    std::map<ClusterId, std::size_t> uses;
    for (const auto& [text, id] : pool_) {
        if (!clusters_.count(id))
            flag("pool \"" + text + "\"", "points to missing cluster " + std::to_string(id));
        else
            ++uses[id];
    }
    for (const auto& [id, count] : uses) {
        if (count > 1)
            flag("pool", "cluster " + std::to_string(id) + " pooled under " +
                             std::to_string(count) + " keys");
    }
    return violations;
}

// ---------------------------------------------------------------------------
// State snapshot (tree is derived and rebuilt on import)

namespace {

nlohmann::json syntax_to_json(const SyntaxTemplate& syntax) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& token : syntax.tokens())
        arr.push_back(token.wildcard ? std::string(kWildcard) : token.literal);
    return arr;
}

SyntaxTemplate syntax_from_json(const nlohmann::json& arr) {
    std::vector<SyntaxToken> tokens;
    for (const auto& item : arr) {
        std::string text = item.get<std::string>();
        if (text == kWildcard)
            tokens.push_back(SyntaxToken::any());
        else
            tokens.push_back(SyntaxToken::lit(std::move(text)));
    }
    return SyntaxTemplate(std::move(tokens));
}

} // namespace

std::string ParserState::export_json() const {
    nlohmann::json doc;
    doc["clusters"] = nlohmann::json::array();
    for (const auto& [id, cluster] : clusters_) {
        nlohmann::json entry;
        entry["id"] = id;
        entry["template"] = cluster.log_template.text();
        nlohmann::json by_arity = nlohmann::json::object();
        for (const auto& [arity, list] : cluster.syntax_templates) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& syntax : list) arr.push_back(syntax_to_json(syntax));
            by_arity[std::to_string(arity)] = std::move(arr);
        }
        entry["syntax_templates"] = std::move(by_arity);
        nlohmann::json members = nlohmann::json::array();
        for (const auto& ref : cluster.member_ids)
            members.push_back(nlohmann::json::array({ref.source, ref.line_id}));
        entry["member_ids"] = std::move(members);
        entry["representative"] = cluster.representative_content;
        if (cluster.embedding) entry["embedding"] = *cluster.embedding;
        doc["clusters"].push_back(std::move(entry));
    }
    doc["pool"] = nlohmann::json::object();
    for (const auto& [text, id] : pool_) doc["pool"][text] = id;
    return doc.dump(2);
}

ParserState ParserState::import_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    ParserState state;
    for (const auto& entry : doc.at("clusters")) {
        LogCluster cluster;
        cluster.cluster_id = entry.at("id").get<ClusterId>();
        cluster.log_template = LogTemplate(entry.at("template").get<std::string>());
        for (const auto& [key, arr] : entry.at("syntax_templates").items()) {
            std::size_t arity = std::stoul(key);
            for (const auto& syn : arr) {
                SyntaxTemplate syntax = syntax_from_json(syn);
                cluster.syntax_templates[arity].push_back(syntax);
                state.tree_.insert(syntax, cluster.cluster_id);
            }
        }
        for (const auto& member : entry.at("member_ids"))
            cluster.member_ids.push_back({member.at(0).get<std::string>(), member.at(1).get<int>()});
        cluster.representative_content = entry.value("representative", std::string());
        if (!cluster.representative_content.empty())
            cluster.representative_tokens = tokenize(cluster.representative_content);
        if (entry.contains("embedding"))
            cluster.embedding = entry.at("embedding").get<std::vector<double>>();
        state.next_id_ = std::max(state.next_id_, cluster.cluster_id + 1);
        state.clusters_.emplace(cluster.cluster_id, std::move(cluster));
    }
    for (const auto& [key, id] : doc.at("pool").items())
        state.pool_[key] = id.get<ClusterId>();
    return state;
}

} // namespace babylon
