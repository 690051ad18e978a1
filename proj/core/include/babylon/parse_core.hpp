#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "babylon/errors.hpp"
#include "babylon/ingest.hpp"

namespace babylon {

using ClusterId = int;

/// One position of a syntax template: a literal token or a wildcard that
/// accepts exactly one log token.
struct SyntaxToken {
    bool wildcard = false;
    std::string literal;  // empty when wildcard

    static SyntaxToken any() { return {true, {}}; }
    static SyntaxToken lit(std::string text) { return {false, std::move(text)}; }
    bool operator==(const SyntaxToken&) const = default;
};

/// Token-granular Literal/Wildcard mask of fixed arity. Syntax templates
/// correspond one-to-one with the tokens of the raw logs they were derived
/// from; matching is only defined for token lists of the same arity.
class SyntaxTemplate {
public:
    SyntaxTemplate() = default;
    explicit SyntaxTemplate(std::vector<SyntaxToken> tokens) : tokens_(std::move(tokens)) {}

    std::size_t arity() const { return tokens_.size(); }
    const std::vector<SyntaxToken>& tokens() const { return tokens_; }

    /// Strict alignment: arity equal and every literal position equals the
    /// corresponding log token; wildcards accept any token.
    bool matches(const std::vector<std::string>& log_tokens) const;

    /// Count of literal positions whose literal equals the log token.
    /// Only meaningful when arity matches.
    std::size_t literal_overlap(const std::vector<std::string>& log_tokens) const;

    std::size_t literal_count() const;

    /// Canonical single-line form with wildcards rendered as <*>.
    std::string key() const;

    bool operator==(const SyntaxTemplate&) const = default;

private:
    std::vector<SyntaxToken> tokens_;
};

/// Template text in which each variable slot is the placeholder <*>.
/// A single placeholder may stand for several raw tokens. Text is stored
/// whitespace-canonical (trimmed, runs collapsed).
class LogTemplate {
public:
    LogTemplate() = default;
    explicit LogTemplate(std::string_view text);  // throws EmptyContentError on blank

    const std::string& text() const { return text_; }
    std::vector<std::string> tokens() const;  // whitespace-split template tokens

    bool operator==(const LogTemplate&) const = default;
    auto operator<=>(const LogTemplate&) const = default;

private:
    std::string text_;
};

struct MemberRef {
    std::string source;
    int line_id = 0;

    bool operator==(const MemberRef&) const = default;
    auto operator<=>(const MemberRef&) const = default;
};

/// A collection of logs sharing one log template. Multiple syntax templates
/// per cluster are kept in a dictionary keyed by token count.
struct LogCluster {
    ClusterId cluster_id = -1;
    LogTemplate log_template;
    std::map<std::size_t, std::vector<SyntaxTemplate>> syntax_templates;  // arity -> masks
    std::vector<MemberRef> member_ids;  // append-only, duplicate-free
    std::optional<std::vector<double>> embedding;

    // First member, retained for demonstration selection.
    std::string representative_content;
    std::vector<std::string> representative_tokens;

    bool holds_arity(std::size_t arity) const;
    bool has_member(const MemberRef& ref) const;

    /// Best-aligned syntax template of the given arity (max literal overlap;
    /// ties resolve to the earliest stored). Null when the arity is absent.
    const SyntaxTemplate* best_aligned(const std::vector<std::string>& log_tokens) const;

    /// Max literal overlap over syntax templates of the query's arity.
    std::size_t best_overlap(const std::vector<std::string>& log_tokens) const;
};

/// Match taxonomy: strict, loose, or non-existent.
struct MatchResult {
    enum class Kind { Strict, Loose, None };

    Kind kind = Kind::None;
    ClusterId strict_id = -1;            // valid when Strict
    std::vector<ClusterId> loose_ids;    // valid when Loose; descending literal overlap

    static MatchResult strict(ClusterId id) { return {Kind::Strict, id, {}}; }
    static MatchResult loose(std::vector<ClusterId> ids) {
        return {Kind::Loose, -1, std::move(ids)};
    }
    static MatchResult none() { return {}; }

    bool is_strict() const { return kind == Kind::Strict; }
    bool is_loose() const { return kind == Kind::Loose; }
    bool is_none() const { return kind == Kind::None; }
    bool operator==(const MatchResult&) const = default;
};

/// Rooted token trie with wildcard branches routing logs to candidate
/// clusters. Cluster pointers live at path-terminal nodes; one cluster may
/// be reachable from multiple nodes (one per syntax template).
class ParseTree {
public:
    ParseTree();
    ~ParseTree();
    ParseTree(const ParseTree& other);
    ParseTree& operator=(const ParseTree& other);
    ParseTree(ParseTree&&) noexcept;
    ParseTree& operator=(ParseTree&&) noexcept;

    /// Ensures the path for `syntax` exists and its terminal node references
    /// `id`. Idempotent.
    void insert(const SyntaxTemplate& syntax, ClusterId id);

    /// True when the terminal node of `syntax`'s path references `id`.
    bool contains(const SyntaxTemplate& syntax, ClusterId id) const;

    /// All cluster ids referenced at nodes reached by consuming every token,
    /// exploring literal children and wildcard children at each step.
    std::set<ClusterId> reachable(const std::vector<std::string>& tokens) const;

    /// Every cluster id referenced anywhere in the tree.
    std::set<ClusterId> all_refs() const;

    std::size_t node_count() const;
    void clear();

private:
    struct Node;
    std::unique_ptr<Node> root_;
};

struct AuditViolation {
    std::string locator;  // e.g. "cluster 3", "pool \"...\"", "tree"
    std::string detail;
};

/// Aligns a log template against concrete tokens. Each <*> consumes the
/// fewest whole tokens (at least one) such that all later literal fragments
/// still align at token boundaries; a <*> embedded in a token (`size=<*>`)
/// marks the whole token Wildcard. Throws AlignmentError when the literals
/// cannot be aligned.
SyntaxTemplate derive_syntax_template(const LogTemplate& log_template,
                                      const std::vector<std::string>& tokens);

/// Renders a mask back to template text: literals joined by spaces, maximal
/// wildcard runs collapsed to a single <*>.
LogTemplate template_from_mask(const SyntaxTemplate& mask);

/// Positionwise generalization against the cluster's best-aligned syntax
/// template: literal positions that disagree with the log become wildcards.
/// The merge succeeds iff at least one literal survives and surviving
/// literals cover at least half the arity.
std::optional<LogTemplate> check_merge(const std::vector<std::string>& tokens,
                                       const LogCluster& cluster);

/// Mutable parser state: cluster registry, template pool, and the prefix
/// parse tree (derived state, rebuilt on import). Single writer; concurrent
/// readers should work against snapshot() copies.
class ParserState {
public:
    ParserState() = default;

    const std::map<ClusterId, LogCluster>& clusters() const { return clusters_; }
    const LogCluster* find_cluster(ClusterId id) const;
    LogCluster* find_cluster(ClusterId id);
    std::size_t cluster_count() const { return clusters_.size(); }

    /// Trie search. Returns Strict for the first strictly matching cluster
    /// (lowest id), else Loose over reached candidates, else NoMatch.
    /// Clusters lacking a syntax template of the query's arity never match.
    MatchResult search(const std::vector<std::string>& tokens) const;

    /// Full scan, independent of the tree: every cluster holding a syntax
    /// template of the query's arity, ordered by descending literal overlap
    /// (ties toward lower cluster id).
    std::vector<ClusterId> find_loose_matches(const std::vector<std::string>& tokens) const;

    void update_tree(const SyntaxTemplate& syntax, ClusterId id);

    ClusterId create_cluster(const LogTemplate& log_template, const LogRecord& record,
                             const SyntaxTemplate& syntax);

    /// Appends a member; returns false (and changes nothing) when the
    /// (source, line_id) pair is already present.
    bool append_member(ClusterId id, const LogRecord& record);

    /// Adds a syntax template (dedup) and threads it into the tree.
    void add_syntax(ClusterId id, const SyntaxTemplate& syntax);

    /// Replaces the cluster's template and re-keys the pool. Returns false
    /// when the new text is already pooled by a different cluster.
    bool replace_template(ClusterId id, const LogTemplate& next);

    std::optional<ClusterId> pool_lookup(const std::string& template_text) const;
    const std::map<std::string, ClusterId>& pool() const { return pool_; }
    std::map<std::string, ClusterId>& pool() { return pool_; }

    const ParseTree& tree() const { return tree_; }
    ParseTree& tree() { return tree_; }

    /// Tokens of a member as seen at append time; null when unknown (e.g.
    /// members restored from a snapshot).
    const std::vector<std::string>* member_tokens(const MemberRef& ref) const;

    /// Checks every structural invariant of tree, clusters, and pool.
    /// An empty result means the state is consistent.
    std::vector<AuditViolation> audit_consistency() const;

    /// Deep copy for concurrent query workloads.
    ParserState snapshot() const { return *this; }

    /// JSON state document {clusters:[...], pool:{...}}. The tree is derived
    /// state and is rebuilt from syntax templates on import.
    std::string export_json() const;
    static ParserState import_json(const std::string& text);

private:
    std::map<ClusterId, LogCluster> clusters_;
    std::map<std::string, ClusterId> pool_;  // template text -> cluster
    ParseTree tree_;
    std::map<MemberRef, std::vector<std::string>> member_tokens_;
    ClusterId next_id_ = 0;
};

} // namespace babylon
