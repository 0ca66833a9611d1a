#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace factcause {

using Edge = std::pair<std::string, std::string>;
using NodeSet = std::set<std::string>;

/// Immutable directed acyclic graph over named variables.
///
/// Nodes keep their declaration order; adjacency lists are sorted by node
/// index so every traversal is deterministic.
class CausalGraph {
public:
    /// Validates and builds a DAG. Throws DuplicateNode, UnknownNode or
    /// CyclicGraph.
    static CausalGraph build(std::vector<std::string> nodes, std::vector<Edge> edges);

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& nodes() const { return names_; }
    std::vector<Edge> edges() const;

    bool contains(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    const std::string& name(std::size_t index) const { return names_[index]; }

    const std::vector<std::size_t>& parents(std::size_t index) const { return parents_[index]; }
    const std::vector<std::size_t>& children(std::size_t index) const { return children_[index]; }

    /// Node indices reachable through directed edges, excluding `index`.
    std::vector<bool> descendants(std::size_t index) const;
    /// Nodes of `seeds` together with all of their ancestors.
    std::vector<bool> ancestral_closure(const std::vector<bool>& seeds) const;
    std::vector<std::size_t> topological_order() const;

    /// Copy with every edge leaving `node` removed.
    CausalGraph without_outgoing(std::string_view node) const;

    friend bool operator==(const CausalGraph& a, const CausalGraph& b);

private:
    CausalGraph() = default;

    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
};

/// Canonical names of the knowledge-probing graph.
namespace node {
inline constexpr const char* kSubject = "subj";
inline constexpr const char* kObject = "obj";
inline constexpr const char* kRelation = "rel";
inline constexpr const char* kKbt = "KBT";
inline constexpr const char* kPattern = "PAT";
inline constexpr const char* kSoc = "SOC_so";
inline constexpr const char* kSoHc = "SO_hC";
inline constexpr const char* kPoc = "POC_uo";
inline constexpr const char* kPoHc = "PO_hC";
inline constexpr const char* kUtterance = "UTT";
inline constexpr const char* kDataset = "dataset";
inline constexpr const char* kModel = "Theta";
inline constexpr const char* kCloze = "cloze";
inline constexpr const char* kPrediction = "Y_hat";
inline constexpr const char* kOutcomeUtt = "O_utt";
inline constexpr const char* kOutcomePoc = "O_poc";
inline constexpr const char* kOutcomeSoc = "O_soc";
} // namespace node

/// The 17-node graph linking knowledge-base triplets, training-data
/// statistics, the model and its artifact predictions.
CausalGraph knowledge_probing_graph();

/// Reachability-based d-separation (linear in the graph size).
/// Throws UnknownNode, or OverlappingSets when x or y is in z.
bool is_d_separated(const CausalGraph& g, std::string_view x, std::string_view y, const NodeSet& z);

/// Same decision obtained by enumerating simple paths between x and y and
/// checking each one for a blocking node. Exponential; meant for small graphs
/// and for cross-checking the reachability routine.
bool is_d_separated_by_paths(const CausalGraph& g, std::string_view x, std::string_view y,
                             const NodeSet& z);

/// Backdoor criterion: no member of z descends from treatment, and z blocks
/// every path that enters treatment through an incoming edge.
bool satisfies_backdoor(const CausalGraph& g, std::string_view treatment, std::string_view outcome,
                        const NodeSet& z);

/// Plain-text edge list: `parent -> child` per line, a bare name declares an
/// isolated node, `#` starts a comment.
CausalGraph read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const CausalGraph& g);

} // namespace factcause
