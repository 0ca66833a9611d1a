#include "factcause/causal_graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <istream>
#include <ostream>
#include <string>

#include "factcause/error.hpp"
#include "factcause/text.hpp"

namespace factcause {

CausalGraph CausalGraph::build(std::vector<std::string> nodes, std::vector<Edge> edges) {
    CausalGraph g;
    g.names_ = std::move(nodes);
    for (std::size_t i = 0; i < g.names_.size(); ++i) {
        if (g.names_[i].empty()) throw Error(Errc::UnknownNode, "empty node name");
        if (!g.index_.emplace(g.names_[i], i).second)
            throw Error(Errc::DuplicateNode, "node '" + g.names_[i] + "' declared twice");
    }
    g.parents_.resize(g.names_.size());
    g.children_.resize(g.names_.size());
    for (const auto& [parent, child] : edges) {
        auto p = g.index_.find(parent);
        if (p == g.index_.end()) throw Error(Errc::UnknownNode, "edge references undeclared node '" + parent + "'");
        auto c = g.index_.find(child);
        if (c == g.index_.end()) throw Error(Errc::UnknownNode, "edge references undeclared node '" + child + "'");
        if (p->second == c->second) throw Error(Errc::CyclicGraph, "self loop on '" + parent + "'");
        g.children_[p->second].push_back(c->second);
        g.parents_[c->second].push_back(p->second);
    }
    auto tidy = [](std::vector<std::size_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    for (auto& v : g.parents_) tidy(v);
    for (auto& v : g.children_) tidy(v);

    if (g.topological_order().size() != g.size()) throw Error(Errc::CyclicGraph, "graph contains a directed cycle");
    return g;
}

std::vector<Edge> CausalGraph::edges() const {
    std::vector<Edge> out;
    for (std::size_t p = 0; p < size(); ++p)
        for (std::size_t c : children_[p]) out.emplace_back(names_[p], names_[c]);
    return out;
}

bool CausalGraph::contains(std::string_view name) const {
    return index_.find(std::string(name)) != index_.end();
}

std::size_t CausalGraph::index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw Error(Errc::UnknownNode, "no node named '" + std::string(name) + "'");
    return it->second;
}

std::vector<bool> CausalGraph::descendants(std::size_t index) const {
    std::vector<bool> seen(size(), false);
    std::vector<std::size_t> stack(children_[index].begin(), children_[index].end());
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        if (seen[n]) continue;
        seen[n] = true;
        for (std::size_t c : children_[n])
            if (!seen[c]) stack.push_back(c);
    }
    return seen;
}

std::vector<bool> CausalGraph::ancestral_closure(const std::vector<bool>& seeds) const {
    std::vector<bool> seen(size(), false);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < size(); ++i)
        if (seeds[i]) stack.push_back(i);
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        if (seen[n]) continue;
        seen[n] = true;
        for (std::size_t p : parents_[n])
            if (!seen[p]) stack.push_back(p);
    }
    return seen;
}

std::vector<std::size_t> CausalGraph::topological_order() const {
    std::vector<std::size_t> indegree(size());
    for (std::size_t i = 0; i < size(); ++i) indegree[i] = parents_[i].size();
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < size(); ++i)
        if (indegree[i] == 0) ready.push_back(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const std::size_t n = ready.front();
        ready.pop_front();
        order.push_back(n);
        for (std::size_t c : children_[n])
            if (--indegree[c] == 0) ready.push_back(c);
    }
    return order;
}

CausalGraph CausalGraph::without_outgoing(std::string_view node) const {
    const std::size_t cut = index_of(node);
    std::vector<Edge> kept;
    for (std::size_t p = 0; p < size(); ++p) {
        if (p == cut) continue;
        for (std::size_t c : children_[p]) kept.emplace_back(names_[p], names_[c]);
    }
    return build(names_, std::move(kept));
}

bool operator==(const CausalGraph& a, const CausalGraph& b) {
    return a.names_ == b.names_ && a.parents_ == b.parents_ && a.children_ == b.children_;
}

CausalGraph knowledge_probing_graph() {
    using namespace node;
    std::vector<std::string> nodes = {kSubject, kObject,   kRelation, kKbt,       kPattern,    kSoc,
                                      kSoHc,    kPoc,      kPoHc,     kUtterance, kDataset,    kModel,
                                      kCloze,   kPrediction, kOutcomeUtt, kOutcomePoc, kOutcomeSoc};
    std::vector<Edge> edges = {
        {kSubject, kKbt},        {kObject, kKbt},         {kRelation, kKbt},
        {kRelation, kPattern},   {kKbt, kUtterance},      {kSoc, kUtterance},
        {kPattern, kUtterance},  {kKbt, kSoc},            {kSoc, kSoHc},
        {kPattern, kPoc},        {kPoc, kPoHc},           {kUtterance, kDataset},
        {kDataset, kModel},      {kPattern, kCloze},      {kKbt, kCloze},
        {kCloze, kPrediction},   {kModel, kPrediction},   {kPrediction, kOutcomeUtt},
        {kUtterance, kOutcomeUtt}, {kPrediction, kOutcomePoc}, {kPoHc, kOutcomePoc},
        {kPrediction, kOutcomeSoc}, {kSoHc, kOutcomeSoc},
    };
    return CausalGraph::build(std::move(nodes), std::move(edges));
}

namespace {

struct Query {
    std::size_t x;
    std::size_t y;
    std::vector<bool> in_z;
};

Query resolve(const CausalGraph& g, std::string_view x, std::string_view y, const NodeSet& z) {
    Query q{g.index_of(x), g.index_of(y), std::vector<bool>(g.size(), false)};
    for (const auto& name : z) q.in_z[g.index_of(name)] = true;
    if (q.in_z[q.x] || q.in_z[q.y])
        throw Error(Errc::OverlappingSets, "endpoints must not belong to the conditioning set");
    return q;
}

} // namespace

bool is_d_separated(const CausalGraph& g, std::string_view x, std::string_view y, const NodeSet& z) {
    const Query q = resolve(g, x, y, z);
    if (q.x == q.y) return false;
    // Colliders are open exactly when they are in z or have a descendant in z.
    const std::vector<bool> opens_collider = g.ancestral_closure(q.in_z);

    enum Dir : std::size_t { kUp = 0, kDown = 1 };  // up: arrived from a child
    std::vector<std::array<bool, 2>> visited(g.size(), {false, false});
    std::vector<std::pair<std::size_t, Dir>> frontier{{q.x, kUp}};
    while (!frontier.empty()) {
        auto [n, dir] = frontier.back();
        frontier.pop_back();
        if (visited[n][dir]) continue;
        visited[n][dir] = true;
        if (n == q.y && !q.in_z[n]) return false;
        if (dir == kUp) {
            if (q.in_z[n]) continue;
            for (std::size_t p : g.parents(n)) frontier.emplace_back(p, kUp);
            for (std::size_t c : g.children(n)) frontier.emplace_back(c, kDown);
        } else {
            if (!q.in_z[n])
                for (std::size_t c : g.children(n)) frontier.emplace_back(c, kDown);
            if (opens_collider[n])
                for (std::size_t p : g.parents(n)) frontier.emplace_back(p, kUp);
        }
    }
    return true;
}

namespace {

struct PathSearch {
    const CausalGraph& g;
    const Query& q;
    std::vector<bool> opens_collider;
    std::vector<bool> on_path;

    bool is_edge(std::size_t from, std::size_t to) const {
        const auto& ch = g.children(from);
        return std::binary_search(ch.begin(), ch.end(), to);
    }

    // Extends an open partial path ending prev -> cur; true if some extension
    // reaches y while staying open.
    bool open_path_from(std::size_t prev, std::size_t cur) {
        if (cur == q.y) return true;
        on_path[cur] = true;
        std::vector<std::size_t> neighbours(g.parents(cur).begin(), g.parents(cur).end());
        neighbours.insert(neighbours.end(), g.children(cur).begin(), g.children(cur).end());
        bool found = false;
        for (std::size_t next : neighbours) {
            if (on_path[next]) continue;
            const bool collider = is_edge(prev, cur) && is_edge(next, cur);
            const bool blocked = collider ? !opens_collider[cur] : static_cast<bool>(q.in_z[cur]);
            if (blocked) continue;
            if (open_path_from(cur, next)) {
                found = true;
                break;
            }
        }
        on_path[cur] = false;
        return found;
    }
};

} // namespace

bool is_d_separated_by_paths(const CausalGraph& g, std::string_view x, std::string_view y, const NodeSet& z) {
    const Query q = resolve(g, x, y, z);
    if (q.x == q.y) return false;
    PathSearch search{g, q, g.ancestral_closure(q.in_z), std::vector<bool>(g.size(), false)};
    search.on_path[q.x] = true;
    std::vector<std::size_t> neighbours(g.parents(q.x).begin(), g.parents(q.x).end());
    neighbours.insert(neighbours.end(), g.children(q.x).begin(), g.children(q.x).end());
    for (std::size_t next : neighbours)
        if (search.open_path_from(q.x, next)) return false;
    return true;
}

bool satisfies_backdoor(const CausalGraph& g, std::string_view treatment, std::string_view outcome,
                        const NodeSet& z) {
    const std::size_t t = g.index_of(treatment);
    const std::size_t o = g.index_of(outcome);
    if (t == o) throw Error(Errc::OverlappingSets, "treatment and outcome must differ");
    const std::vector<bool> desc = g.descendants(t);
    for (const auto& name : z)
        if (desc[g.index_of(name)]) return false;
    if (z.count(std::string(treatment)) || z.count(std::string(outcome))) return false;
    // Removing the treatment's outgoing edges leaves only backdoor paths.
    return is_d_separated(g.without_outgoing(treatment), treatment, outcome, z);
}

CausalGraph read_edge_list(std::istream& in) {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::unordered_map<std::string, bool> seen;
    auto declare = [&](const std::string& n) {
        if (seen.emplace(n, true).second) nodes.push_back(n);
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = text::trim(body);
        if (body.empty()) continue;
        const auto arrow = body.find("->");
        if (arrow == std::string_view::npos) {
            declare(std::string(body));
            continue;
        }
        const std::string parent(text::trim(body.substr(0, arrow)));
        const std::string child(text::trim(body.substr(arrow + 2)));
        if (parent.empty() || child.empty() || child.find("->") != std::string::npos)
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected 'parent -> child'");
        declare(parent);
        declare(child);
        edges.emplace_back(parent, child);
    }
    return CausalGraph::build(std::move(nodes), std::move(edges));
}

void write_edge_list(std::ostream& out, const CausalGraph& g) {
    // Declaring every node up front keeps declaration order across a round trip.
    for (const auto& n : g.nodes()) out << n << '\n';
    for (const auto& [p, c] : g.edges()) out << p << " -> " << c << '\n';
}

} // namespace factcause
