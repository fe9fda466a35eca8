#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "prox/cquadtree.hpp"
#include "prox/knn_query.hpp"
#include "prox/quorum.hpp"

namespace prox {

// Approximate Voronoi diagram of a small site set by adaptive subdivision:
// the representative of the smallest cell holding q is a (1+eps)-ANN of q.
class PointAvd {
 public:
  PointAvd() = default;
  // sites: D x m, inside [0,1]^D. With base_only, only queries on the face
  // x_D = 0 are served and the cells are reported projected to R^{D-1}.
  static PointAvd build(const Eigen::MatrixXd& sites, double eps, bool base_only = false,
                        int floor_level = kMinLevel);

  // q has D coordinates (D-1 in base mode)
  int query(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  const CompressedQuadtree& tree() const { return tree_; }  // leaf payload = site
  std::size_t cell_count() const { return leaves_; }
  std::size_t uncertified() const { return uncertified_; }
  bool base_only() const { return base_only_; }
  double eps() const { return eps_; }

 private:
  CompressedQuadtree tree_;
  Eigen::MatrixXd sites_;
  double eps_ = 0;
  bool base_only_ = false;
  std::size_t leaves_ = 0, uncertified_ = 0;
};

// Lifted quorum balls with a sqrt(2)-ANN over them: value in [d_k, 10 sqrt(2) d_k].
class ConstantFactor {
 public:
  struct Answer {
    double value = 0;
    Eigen::Index witness = -1;
    int cluster = -1;
  };

  ConstantFactor() = default;
  static ConstantFactor build(const PointSet& ps, long k, std::uint64_t seed = 1);
  static ConstantFactor from_clustering(const PointSet& ps, const QuorumClustering& qc, std::uint64_t seed = 1);

  Answer query(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  std::size_t cluster_count() const { return radii_.size(); }

 private:
  Eigen::MatrixXd centers_;
  std::vector<double> radii_;
  std::vector<Eigen::Index> member_;
  Transform lift_;  // lifted input = lift_.to_input(internal)
  KnnQueryStructure ann_;
};

struct KavdOptions {
  double zeta1 = 0.5;  // environ grid fineness; cells are (eps/(zeta1 d)) 2^j r wide
  std::uint64_t seed = 1;
  double avd_factor = 0.125;  // the lifted AVD is built at eps * avd_factor
  bool refine = true;       // certified subdivision of cells that cannot prove the band
  int floor_level = 1;      // 1 = derive from the clustering
};

struct KavdStats {
  std::size_t x_cells = 0, s_cells = 0, overlay_cells = 0;
  std::size_t evaluated = 0, split = 0, uncertified = 0;
  int floor_level = 0;
  std::size_t clusters = 0;
};

struct KavdAnswer {
  double value = 0;
  Eigen::Index witness = -1;  // index into the point set given to build
  int node = -1;
  bool first_term = false;    // the lifted-cluster term attained the minimum
};

class KavdSketch {
 public:
  struct Cell {
    std::int32_t cluster = -1;  // rep_X
    double adknn = 0;
    std::int32_t knnrep = -1;   // slot
    std::uint8_t cert = 0;      // bit 0: knnrep certified as witness, bit 1: cluster member
  };
  struct ClusterRec {
    Vector center;
    double radius = 0;
    std::int32_t member = -1;   // slot of pnt_rep_X
  };

  KavdSketch() = default;
  // ps normalized (and padded so that k divides its size)
  static KavdSketch build(const PointSet& ps, long k, double eps, const KavdOptions& opt = {});
  static KavdSketch build_weighted(const PointSet& ps, double tau, double eps, const KavdOptions& opt = {});

  KavdAnswer query(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  // same, with the cell already located
  KavdAnswer answer_at(const Eigen::Ref<const Eigen::VectorXd>& q, int node) const;

  const CompressedQuadtree& tree() const { return tree_; }
  std::size_t cell_count() const { return tree_.size(); }
  const Cell& cell(int node) const { return cells_[node]; }
  const ClusterRec& cluster(int i) const { return clusters_[i]; }
  std::size_t cluster_count() const { return clusters_.size(); }
  Eigen::Index slot_index(int s) const { return slot_ids_[s]; }
  auto slot_point(int s) const { return slot_coords_.col(s); }
  Vector rep(int node) const { return tree_.node(node).cube.center(); }
  const KavdStats& stats() const { return stats_; }
  int dim() const { return tree_.dim(); }
  bool weighted() const { return weighted_; }
  long k() const { return k_; }
  double tau() const { return tau_; }
  double eps() const { return eps_; }
  const Transform& transform() const { return transform_; }

  static constexpr std::uint32_t kVersion = 1;
  void save(std::ostream& out) const;
  static KavdSketch load(std::istream& in);

 private:
  friend struct KavdBuilder;
  CompressedQuadtree tree_;
  std::vector<Cell> cells_;  // by node
  std::vector<ClusterRec> clusters_;
  std::vector<Eigen::Index> slot_ids_;
  Eigen::MatrixXd slot_coords_;
  Transform transform_;
  bool weighted_ = false;
  long k_ = 0;
  double tau_ = 0, eps_ = 0;
  KavdStats stats_;
};

}  // namespace prox
