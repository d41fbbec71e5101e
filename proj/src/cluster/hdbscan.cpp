#include "lloom/cluster/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "lloom/error.hpp"

namespace lloom::cluster {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// Multiway single-linkage dendrogram: node ids < n are points.
struct Dendrogram {
    struct Node {
        double weight = 0.0;
        std::vector<std::size_t> children;
        std::size_t size = 1;
    };
    std::size_t n = 0;
    std::vector<Node> internal; // id = n + index

    std::size_t size_of(std::size_t id) const { return id < n ? 1 : internal[id - n].size; }
    std::size_t root() const { return n + internal.size() - 1; }
};

Dendrogram build_dendrogram(std::span<const MstEdge> mst, std::size_t n) {
    std::vector<MstEdge> edges(mst.begin(), mst.end());
    std::sort(edges.begin(), edges.end(), edge_less);

    Dendrogram dg;
    dg.n = n;
    UnionFind uf(n);
    std::vector<std::size_t> node_of(n);
    std::iota(node_of.begin(), node_of.end(), std::size_t{0});

    for (std::size_t g = 0; g < edges.size();) {
        std::size_t end = g;
        while (end < edges.size() && edges[end].weight == edges[g].weight) ++end;

        // Components touched by this weight level, before merging.
        std::vector<std::pair<std::size_t, std::size_t>> before; // (old root, old node)
        for (std::size_t i = g; i < end; ++i) {
            for (const auto p : {edges[i].a, edges[i].b}) {
                const auto r = uf.find(p);
                before.emplace_back(r, node_of[r]);
            }
        }
        for (std::size_t i = g; i < end; ++i) uf.unite(edges[i].a, edges[i].b);

        std::map<std::size_t, std::set<std::size_t>> merged; // new root -> old nodes
        for (const auto& [old_root, old_node] : before) merged[uf.find(old_root)].insert(old_node);
        for (auto& [root, olds] : merged) {
            if (olds.size() < 2) continue;
            Dendrogram::Node node;
            node.weight = edges[g].weight;
            node.children.assign(olds.begin(), olds.end());
            node.size = 0;
            for (const auto c : node.children) node.size += dg.size_of(c);
            dg.internal.push_back(std::move(node));
            node_of[root] = n + dg.internal.size() - 1;
        }
        g = end;
    }
    if (n > 1 && (dg.internal.empty() || dg.size_of(dg.root()) != n))
        throw PreconditionError("edge list is not a spanning tree over " + std::to_string(n) + " points");
    return dg;
}

void collect_points(const Dendrogram& dg, std::size_t id, std::vector<std::size_t>& out) {
    std::vector<std::size_t> stack{id};
    while (!stack.empty()) {
        const auto cur = stack.back();
        stack.pop_back();
        if (cur < dg.n) {
            out.push_back(cur);
            continue;
        }
        const auto& ch = dg.internal[cur - dg.n].children;
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
}

std::vector<CondensedTreeNode> condense(const Dendrogram& dg, std::size_t min_cluster_size) {
    std::vector<CondensedTreeNode> rows;
    const auto n = dg.n;
    std::map<std::size_t, std::size_t> relabel;
    relabel[dg.root()] = n;
    std::size_t next_label = n + 1;

    std::deque<std::size_t> queue{dg.root()};
    while (!queue.empty()) {
        const auto node = queue.front();
        queue.pop_front();
        if (node < n) continue;
        const auto& dn = dg.internal[node - n];
        const double lambda = dn.weight > 0.0 ? 1.0 / dn.weight : kInf;
        const auto label = relabel.at(node);

        std::vector<std::size_t> big, small;
        for (const auto c : dn.children) (dg.size_of(c) >= min_cluster_size ? big : small).push_back(c);

        if (big.size() >= 2) {
            for (const auto c : big) {
                relabel[c] = next_label++;
                rows.push_back({label, relabel[c], lambda, dg.size_of(c)});
                queue.push_back(c);
            }
        } else if (big.size() == 1) {
            relabel[big.front()] = label;
            queue.push_back(big.front());
        }
        std::vector<std::size_t> leaving;
        for (const auto c : small) collect_points(dg, c, leaving);
        for (const auto p : leaving) rows.push_back({label, p, lambda, 1});
    }
    return rows;
}

} // namespace

std::vector<EmbeddingVector> normalize(std::span<const EmbeddingVector> vectors) {
    std::vector<EmbeddingVector> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        double norm = 0.0;
        for (const double x : v.values) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0 || !std::isfinite(norm))
            throw PreconditionError("cannot normalize zero vector for item '" + v.item_id + "'");
        EmbeddingVector u{v.item_id, v.values};
        for (auto& x : u.values) x /= norm;
        out.push_back(std::move(u));
    }
    return out;
}

double euclidean(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<double> core_distances(std::span<const Point> points, std::size_t k) {
    const auto n = points.size();
    if (k < 1) throw PreconditionError("core_distances requires k >= 1");
    if (n <= k)
        throw PreconditionError("core_distances requires more points (" + std::to_string(n) + ") than k (" +
                                std::to_string(k) + ")");
    std::vector<double> core(n);
    std::vector<double> row;
    row.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row.push_back(euclidean(points[i], points[j]));
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        core[i] = row[k - 1];
    }
    return core;
}

DistanceMatrix mutual_reachability(std::span<const Point> points, std::span<const double> core) {
    const auto n = points.size();
    if (core.size() != n) throw PreconditionError("core distances do not match point count");
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d.set(i, j, std::max({core[i], core[j], euclidean(points[i], points[j])}));
    return d;
}

std::vector<MstEdge> minimum_spanning_tree(const DistanceMatrix& d) {
    const auto n = d.size();
    if (n < 2) throw PreconditionError("minimum_spanning_tree requires at least 2 points");
    std::vector<bool> in_tree(n, false);
    std::vector<MstEdge> best(n);
    std::vector<bool> has_best(n, false);
    std::vector<MstEdge> edges;
    edges.reserve(n - 1);

    auto make_edge = [&](std::size_t u, std::size_t v) {
        return MstEdge{std::min(u, v), std::max(u, v), d(u, v)};
    };

    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v]) continue;
            const auto e = make_edge(current, v);
            if (!has_best[v] || edge_less(e, best[v])) {
                best[v] = e;
                has_best[v] = true;
            }
        }
        std::size_t next = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!in_tree[v] && (next == n || edge_less(best[v], best[next]))) next = v;
        in_tree[next] = true;
        edges.push_back(best[next]);
        current = next;
    }
    std::sort(edges.begin(), edges.end(), edge_less);
    return edges;
}

Clustering condense_and_extract(std::span<const MstEdge> mst, std::size_t n, std::size_t min_cluster_size) {
    if (min_cluster_size < 2) throw PreconditionError("min_cluster_size must be >= 2");
    Clustering out;
    out.labels.assign(n, kNoise);
    out.membership.assign(n, 0.0);
    if (n == 0) return out;
    if (mst.size() + 1 != n) throw PreconditionError("MST must have n-1 edges");

    // Zero-extent data never splits; treat it as one dense cluster.
    const bool all_zero = std::all_of(mst.begin(), mst.end(), [](const MstEdge& e) { return e.weight == 0.0; });
    if (n > 1 && all_zero) {
        for (std::size_t p = 0; p < n; ++p) out.condensed_tree.push_back({n, p, kInf, 1});
        if (n >= min_cluster_size) {
            out.labels.assign(n, 0);
            out.membership.assign(n, 1.0);
            out.selected_clusters = {n};
        }
        return out;
    }
    if (n == 1) return out;

    const auto dg = build_dendrogram(mst, n);
    out.condensed_tree = condense(dg, min_cluster_size);
    const auto& rows = out.condensed_tree;

    std::size_t max_label = n;
    for (const auto& r : rows) max_label = std::max({max_label, r.parent, r.child});
    const std::size_t n_clusters = max_label - n + 1;
    auto idx = [n](std::size_t cluster) { return cluster - n; };

    std::vector<double> birth(n_clusters, 0.0);
    std::vector<std::size_t> parent_of(n_clusters, 0);
    std::vector<std::vector<std::size_t>> child_clusters(n_clusters);
    for (const auto& r : rows) {
        if (r.child >= n) {
            birth[idx(r.child)] = r.lambda;
            parent_of[idx(r.child)] = r.parent;
            child_clusters[idx(r.parent)].push_back(r.child);
        }
    }

    std::vector<double> stability(n_clusters, 0.0);
    std::vector<double> deaths(n_clusters, 0.0);
    for (const auto& r : rows) {
        const auto p = idx(r.parent);
        stability[p] += (r.lambda - birth[p]) * static_cast<double>(r.child_size);
        deaths[p] = std::max(deaths[p], r.lambda);
    }

    // Excess of mass, leaves first; the root is never selectable.
    std::vector<bool> selected(n_clusters, true);
    selected[0] = false;
    for (std::size_t c = n_clusters; c-- > 1;) {
        double subtree = 0.0;
        for (const auto ch : child_clusters[c]) subtree += stability[idx(ch)];
        if (!child_clusters[c].empty() && subtree > stability[c]) {
            selected[c] = false;
            stability[c] = subtree;
        } else {
            std::vector<std::size_t> stack(child_clusters[c].begin(), child_clusters[c].end());
            while (!stack.empty()) {
                const auto s = stack.back();
                stack.pop_back();
                selected[idx(s)] = false;
                for (const auto g : child_clusters[idx(s)]) stack.push_back(g);
            }
        }
    }

    std::map<std::size_t, int> label_of;
    for (std::size_t c = 1; c < n_clusters; ++c) {
        if (!selected[c]) continue;
        label_of[n + c] = static_cast<int>(out.selected_clusters.size());
        out.selected_clusters.push_back(n + c);
    }

    for (const auto& r : rows) {
        if (r.child >= n) continue;
        std::size_t cluster = r.parent;
        while (cluster != n && !selected[idx(cluster)]) cluster = parent_of[idx(cluster)];
        if (cluster == n) continue;
        out.labels[r.child] = label_of.at(cluster);
        const double max_lambda = deaths[idx(cluster)];
        if (max_lambda == 0.0 || !std::isfinite(r.lambda)) out.membership[r.child] = 1.0;
        else out.membership[r.child] = std::min(r.lambda, max_lambda) / max_lambda;
    }
    return out;
}

Clustering hdbscan(std::span<const Point> points, std::size_t min_cluster_size,
                   std::optional<std::size_t> min_samples) {
    const auto n = points.size();
    if (min_cluster_size < 2) throw PreconditionError("min_cluster_size must be >= 2");
    if (n < min_cluster_size)
        throw PreconditionError("hdbscan needs at least min_cluster_size (" + std::to_string(min_cluster_size) +
                                ") points, got " + std::to_string(n));
    for (const auto& p : points)
        if (p.size() != points.front().size()) throw PreconditionError("points have differing dimensions");
    const auto k = std::clamp<std::size_t>(min_samples.value_or(min_cluster_size), 1, n - 1);
    const auto core = core_distances(points, k);
    const auto mr = mutual_reachability(points, core);
    const auto mst = minimum_spanning_tree(mr);
    return condense_and_extract(mst, n, min_cluster_size);
}

std::vector<ClusterAssignment> hdbscan(std::span<const EmbeddingVector> vectors, std::size_t min_cluster_size,
                                       std::optional<std::size_t> min_samples) {
    const auto unit = normalize(vectors);
    std::vector<Point> points;
    points.reserve(unit.size());
    for (const auto& v : unit) points.push_back(v.values);
    const auto c = hdbscan(points, min_cluster_size, min_samples);
    std::vector<ClusterAssignment> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out.push_back({unit[i].item_id, c.labels[i], c.membership[i]});
    return out;
}

std::size_t default_min_cluster_size(std::size_t n) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(n))));
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw PreconditionError("labelings differ in length");
    const auto n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        table[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto comb2 = [](double x) { return x * (x - 1) / 2.0; };
    double index = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : table) index += comb2(v);
    for (const auto& [k, v] : rows) sum_a += comb2(v);
    for (const auto& [k, v] : cols) sum_b += comb2(v);
    const double expected = sum_a * sum_b / comb2(static_cast<double>(n));
    const double max_index = (sum_a + sum_b) / 2.0;
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

json condensed_tree_json(const Clustering& c) {
    json rows = json::array();
    for (const auto& r : c.condensed_tree)
        rows.push_back({{"parent", r.parent},
                        {"child", r.child},
                        {"lambda", std::isfinite(r.lambda) ? json(r.lambda) : json("inf")},
                        {"child_size", r.child_size}});
    return {{"condensed_tree", std::move(rows)}, {"selected_clusters", c.selected_clusters}, {"labels", c.labels}};
}

} // namespace lloom::cluster
