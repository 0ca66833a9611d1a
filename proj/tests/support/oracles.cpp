#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <regex>
#include <set>

namespace oracle {

std::vector<std::string> SmallDag::names() const {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back("v" + std::to_string(i));
    return out;
}

std::vector<factcause::Edge> SmallDag::named_edges() const {
    std::vector<factcause::Edge> out;
    for (auto [a, b] : edges) out.emplace_back("v" + std::to_string(a), "v" + std::to_string(b));
    return out;
}

SmallDag random_dag(std::mt19937_64& rng, int n, double density) {
    SmallDag g;
    g.n = n;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution coin(density);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) g.edges.emplace_back(perm[i], perm[j]);
    return g;
}

namespace {

std::vector<std::uint32_t> parent_masks(const SmallDag& g) {
    std::vector<std::uint32_t> p(g.n, 0);
    for (auto [a, b] : g.edges) p[b] |= 1u << a;
    return p;
}

std::uint32_t descendants_incl(const SmallDag& g, int v) {
    std::uint32_t seen = 1u << v;
    bool grew = true;
    while (grew) {
        grew = false;
        for (auto [a, b] : g.edges)
            if ((seen >> a & 1u) && !(seen >> b & 1u)) {
                seen |= 1u << b;
                grew = true;
            }
    }
    return seen;
}

} // namespace

bool d_separated_moral(const SmallDag& g, int x, int y, std::uint32_t z_mask) {
    const auto parents = parent_masks(g);
    std::uint32_t anc = (1u << x) | (1u << y) | z_mask;
    bool grew = true;
    while (grew) {
        grew = false;
        for (int v = 0; v < g.n; ++v)
            if ((anc >> v & 1u) && (parents[v] & ~anc)) {
                anc |= parents[v];
                grew = true;
            }
    }
    std::vector<std::uint32_t> adj(g.n, 0);
    for (auto [a, b] : g.edges)
        if ((anc >> a & 1u) && (anc >> b & 1u)) {
            adj[a] |= 1u << b;
            adj[b] |= 1u << a;
        }
    for (int v = 0; v < g.n; ++v) {
        if (!(anc >> v & 1u)) continue;
        const std::uint32_t ps = parents[v];
        for (int a = 0; a < g.n; ++a)
            if (ps >> a & 1u) adj[a] |= ps & ~(1u << a);
    }
    std::uint32_t reached = 1u << x;
    std::vector<int> stack{x};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w = 0; w < g.n; ++w) {
            if (!(adj[v] >> w & 1u) || (reached >> w & 1u) || (z_mask >> w & 1u)) continue;
            reached |= 1u << w;
            stack.push_back(w);
        }
    }
    return !(reached >> y & 1u);
}

std::vector<std::vector<int>> simple_paths(const SmallDag& g, int x, int y) {
    std::vector<std::vector<int>> nbr(g.n);
    for (auto [a, b] : g.edges) {
        nbr[a].push_back(b);
        nbr[b].push_back(a);
    }
    std::vector<std::vector<int>> out;
    std::vector<int> path{x};
    std::vector<bool> on(g.n, false);
    on[x] = true;
    std::function<void(int)> walk = [&](int v) {
        if (v == y) {
            out.push_back(path);
            return;
        }
        for (int w : nbr[v]) {
            if (on[w]) continue;
            on[w] = true;
            path.push_back(w);
            walk(w);
            path.pop_back();
            on[w] = false;
        }
    };
    walk(x);
    return out;
}

PathOracle::PathOracle(const SmallDag& g, int x, int y) {
    std::set<std::pair<int, int>> directed(g.edges.begin(), g.edges.end());
    for (const auto& path : simple_paths(g, x, y)) {
        PathMasks m;
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
            const int prev = path[i - 1], v = path[i], next = path[i + 1];
            const bool collider = directed.count({prev, v}) && directed.count({next, v});
            if (collider)
                m.collider_descendants.push_back(descendants_incl(g, v));
            else
                m.non_colliders |= 1u << v;
        }
        paths_.push_back(std::move(m));
    }
}

bool PathOracle::separated(std::uint32_t z_mask) const {
    for (const auto& p : paths_) {
        if (p.non_colliders & z_mask) continue;
        bool open = true;
        for (auto d : p.collider_descendants)
            if (!(d & z_mask)) {
                open = false;
                break;
            }
        if (open) return false;
    }
    return true;
}

std::vector<std::string> naive_sentences(std::string_view text) {
    static const std::regex boundary(R"(([.!?])\s+)");
    static const std::regex spaces(R"(\s+)");
    std::vector<std::string> out;
    std::string all(text);
    std::size_t start = 0;
    while (start <= all.size()) {
        auto nl = all.find('\n', start);
        if (nl == std::string::npos) nl = all.size();
        std::string line = all.substr(start, nl - start);
        start = nl + 1;
        line = std::regex_replace(line, boundary, "$1\n");
        std::size_t s = 0;
        while (s <= line.size()) {
            auto e = line.find('\n', s);
            if (e == std::string::npos) e = line.size();
            auto piece = std::regex_replace(line.substr(s, e - s), spaces, " ");
            piece = std::regex_replace(piece, std::regex("^ | $"), "");
            if (!piece.empty()) out.push_back(piece);
            s = e + 1;
        }
    }
    return out;
}

namespace {

std::string escape(const std::string& s) {
    static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
    return std::regex_replace(s, special, R"(\$&)");
}

} // namespace

std::int64_t naive_soc(const std::vector<std::string>& sentences, const std::string& subject,
                       const std::string& object) {
    const std::string edge_before = "(^|[^A-Za-z0-9_])";
    const std::string edge_after = "([^A-Za-z0-9_]|$)";
    const std::regex s_re(edge_before + escape(subject) + edge_after);
    const std::regex o_re(edge_before + escape(object) + edge_after);
    std::int64_t n = 0;
    for (const auto& s : sentences)
        if (std::regex_search(s, s_re) && std::regex_search(s, o_re)) ++n;
    return n;
}

std::int64_t naive_poc(const std::vector<std::string>& sentences, const std::string& template_text,
                       const std::string& object) {
    const auto x = template_text.find("[X]");
    const auto y = template_text.find("[Y]");
    std::string pattern;
    if (x < y)
        pattern = escape(template_text.substr(0, x)) + R"((\S|\S.*\S))" + escape(template_text.substr(x + 3, y - x - 3)) +
                  escape(object) + escape(template_text.substr(y + 3));
    else
        pattern = escape(template_text.substr(0, y)) + escape(object) + escape(template_text.substr(y + 3, x - y - 3)) +
                  R"((\S|\S.*\S))" + escape(template_text.substr(x + 3));
    const std::regex re(pattern);
    std::int64_t n = 0;
    for (const auto& s : sentences)
        if (std::regex_match(s, re)) ++n;
    return n;
}

std::optional<factcause::Rational> brute_do(const std::vector<RawRow>& rows, const std::string& x_value) {
    std::set<std::vector<std::string>> strata;
    for (const auto& r : rows) strata.insert(r.z);
    long long total = static_cast<long long>(rows.size());
    factcause::Rational sum = 0;
    factcause::Rational mass = 0;
    for (const auto& z : strata) {
        long long nz = 0, nxz = 0, nxz1 = 0;
        for (const auto& r : rows) {
            if (r.z != z) continue;
            ++nz;
            if (r.x != x_value) continue;
            ++nxz;
            nxz1 += r.y;
        }
        if (nxz == 0) continue;
        const factcause::Rational pz(nz, total);
        sum += factcause::Rational(nxz1, nxz) * pz;
        mass += pz;
    }
    if (mass == 0) return std::nullopt;
    return sum / mass;
}

} // namespace oracle
