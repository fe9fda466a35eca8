#pragma once

#include <cstdint>
#include <vector>

#include "prox/cquadtree.hpp"

namespace prox {

struct KnnResult {
  double beta = 0.0;
  Eigen::Index witness = -1;  // index into the point set given to build()
  double lower = 0.0;         // certified lower bound on the true distance
};

// per-iteration record of the refinement loop
struct KnnTrace {
  std::vector<double> lo, hi;
  std::vector<std::size_t> frontier;  // nodes entering the iteration
  std::vector<std::size_t> live;      // nodes left after pruning
  double rough = 0.0;
};

struct KnnOptions {
  bool prune = true;
  bool check_domain = true;  // reject q outside [0,1]^d
  KnnTrace* trace = nullptr;
};

// Shifted compressed quadtree over the real points with per-node counts,
// weight sums, bounding boxes and representatives. k and eps are chosen
// per query.
class KnnQueryStructure {
 public:
  KnnQueryStructure() = default;
  static KnnQueryStructure build(const PointSet& ps, std::uint64_t seed = 1, double c = 3.0);

  // d_k <= R always; R <= n^c d_k with good probability over the shift
  double rough_knn_distance(const Eigen::Ref<const Eigen::VectorXd>& q, long k) const;
  double rough_weighted_distance(const Eigen::Ref<const Eigen::VectorXd>& q, double tau) const;

  KnnResult knn_distance(const Eigen::Ref<const Eigen::VectorXd>& q, long k, double eps,
                         const KnnOptions& opt = {}) const;
  KnnResult knn_distance_weighted(const Eigen::Ref<const Eigen::VectorXd>& q, double tau, double eps,
                                  const KnnOptions& opt = {}) const;

  const CompressedQuadtree& tree() const { return tree_; }
  const PointSet& points() const { return points_; }  // real points, internal order
  Eigen::Index original_index(Eigen::Index i) const { return index_map_[i]; }
  const Vector& shift() const { return shift_; }
  std::uint64_t seed() const { return seed_; }
  double confidence() const { return c_; }
  long size() const { return static_cast<long>(points_.size()); }
  double total_weight() const { return total_weight_; }

 private:
  template <bool Weighted>
  KnnResult refine(const Eigen::Ref<const Eigen::VectorXd>& q, double need, double eps, const KnnOptions& opt) const;
  template <bool Weighted>
  int rough_node(const Eigen::Ref<const Eigen::VectorXd>& q, double need) const;

  CompressedQuadtree tree_;
  PointSet points_;
  std::vector<Eigen::Index> index_map_;
  Vector shift_;
  std::uint64_t seed_ = 1;
  double c_ = 3.0;
  double total_weight_ = 0.0;
};

}  // namespace prox
