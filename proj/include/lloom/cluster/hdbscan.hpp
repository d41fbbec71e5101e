#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lloom/core/types.hpp"

namespace lloom::cluster {

using Point = std::vector<double>;

/// Dense symmetric matrix with a zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

struct MstEdge {
    std::size_t a = 0; // a < b
    std::size_t b = 0;
    double weight = 0.0;

    bool operator==(const MstEdge&) const = default;
};

/// Strict total order used for deterministic tie-breaking.
constexpr bool edge_less(const MstEdge& x, const MstEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
}

/// Condensed-tree row. Clusters are numbered from n (root) upward; children
/// below n are points leaving `parent` at `lambda`.
struct CondensedTreeNode {
    std::size_t parent = 0;
    std::size_t child = 0;
    double lambda = 0.0;
    std::size_t child_size = 0;

    bool operator==(const CondensedTreeNode&) const = default;
};

struct Clustering {
    /// Cluster label per point (0..k-1), kNoise for noise.
    std::vector<int> labels;
    /// Membership strength in [0, 1]; 0 for noise.
    std::vector<double> membership;
    std::vector<CondensedTreeNode> condensed_tree;
    /// Condensed-tree cluster id for each output label.
    std::vector<std::size_t> selected_clusters;

    std::size_t cluster_count() const { return selected_clusters.size(); }
};

/// Unit-normalizes each vector. Throws PreconditionError naming a zero vector.
std::vector<EmbeddingVector> normalize(std::span<const EmbeddingVector> vectors);

double euclidean(const Point& a, const Point& b);

/// Distance from each point to its k-th nearest neighbour (self excluded).
/// Requires n > k >= 1.
std::vector<double> core_distances(std::span<const Point> points, std::size_t k);

/// max(core(a), core(b), d(a, b)) off the diagonal, 0 on it.
DistanceMatrix mutual_reachability(std::span<const Point> points, std::span<const double> core);

/// Prim's algorithm over the dense matrix, with ties broken by edge_less.
/// Returns n-1 edges sorted by edge_less.
std::vector<MstEdge> minimum_spanning_tree(const DistanceMatrix& d);

/// Builds the condensed tree from an MST over n points and selects clusters
/// by excess of mass. Edges of equal weight are cut together, so the result
/// does not depend on point order.
Clustering condense_and_extract(std::span<const MstEdge> mst, std::size_t n, std::size_t min_cluster_size);

/// Full pipeline over raw points. min_samples defaults to min_cluster_size and
/// is clamped to n-1.
Clustering hdbscan(std::span<const Point> points, std::size_t min_cluster_size,
                   std::optional<std::size_t> min_samples = std::nullopt);

/// Convenience over embeddings: normalizes, clusters, and returns one
/// assignment per vector keyed by item_id.
std::vector<ClusterAssignment> hdbscan(std::span<const EmbeddingVector> vectors, std::size_t min_cluster_size,
                                       std::optional<std::size_t> min_samples = std::nullopt);

/// max(2, ceil(0.02 n)).
std::size_t default_min_cluster_size(std::size_t n);

/// Adjusted Rand index between two labelings (noise treated as one label).
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

json condensed_tree_json(const Clustering& c);

} // namespace lloom::cluster
