#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prox/core.hpp"

namespace prox {

struct QuadNode {
  CanonicalCube cube;
  std::int32_t parent = -1;
  std::int32_t first_child = 0;
  std::int32_t child_count = 0;
  std::int64_t count = 0;  // points in the subtree
  double weight = 0.0;     // weight of the subtree
  std::int32_t rep = -1;   // representative point index
  std::int32_t payload = -1;
  std::int32_t first_point = 0;  // leaves: range into the point order
  std::int32_t num_points = 0;
};

// Nodes are stored in preorder, which is also Z-order of the cubes
// (ancestors first). Node 0 is always the root [0,1]^d unless the tree is empty.
class CompressedQuadtree {
 public:
  CompressedQuadtree() = default;
  explicit CompressedQuadtree(int dim) : dim_(dim) {}

  static CompressedQuadtree from_points(const PointSet& ps, const std::optional<Vector>& shift = {});
  // Minimal compressed quadtree having every cube as a node (plus the root).
  static CompressedQuadtree from_cubes(int dim, std::vector<CanonicalCube> cubes,
                                       const std::vector<std::int32_t>& payloads = {},
                                       const std::optional<Vector>& shift = {});

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const QuadNode& node(int i) const { return nodes_[i]; }
  const std::vector<QuadNode>& nodes() const { return nodes_; }
  std::span<const std::int32_t> children(int i) const {
    return {children_.data() + nodes_[i].first_child, static_cast<std::size_t>(nodes_[i].child_count)};
  }
  std::span<const std::int32_t> leaf_points(int i) const {
    return {point_order_.data() + nodes_[i].first_point, static_cast<std::size_t>(nodes_[i].num_points)};
  }
  bool has_points() const { return bbox_lo_.cols() > 0; }
  auto bbox_lo(int i) const { return bbox_lo_.col(i); }
  auto bbox_hi(int i) const { return bbox_hi_.col(i); }
  const std::optional<Vector>& shift() const { return shift_; }
  bool resolution_exhausted() const { return resolution_exhausted_; }

  // lowest node whose region contains q (q in unshifted coordinates)
  int locate(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  // same, for a finest-level cell already expressed in tree coordinates
  int locate_cell(const CanonicalCube& fine) const;
  // node whose cube is exactly c
  std::optional<int> find(const CanonicalCube& c) const;
  // lowest node whose cube contains c
  int lowest_containing(const CanonicalCube& c) const;
  std::vector<int> root_path(int v) const;  // root first

  void set_payload(int i, std::int32_t p) { nodes_[i].payload = p; }
  void set_colors(std::vector<std::vector<std::int32_t>> colors) { colors_ = std::move(colors); }
  const std::vector<std::int32_t>* colors(int i) const {
    return colors_.empty() ? nullptr : &colors_[i];
  }

  // one node per line: level corner... count color-list payload-tag
  void dump(std::ostream& out) const;
  // structural problems, empty when the tree is sound
  std::vector<std::string> audit() const;

 private:
  friend struct TreeBuilder;
  int dim_ = 0;
  std::vector<QuadNode> nodes_;
  std::vector<std::int32_t> children_;
  std::vector<std::int32_t> point_order_;
  Eigen::MatrixXd bbox_lo_, bbox_hi_;
  std::unordered_map<CanonicalCube, std::int32_t, CubeHash> index_;
  std::optional<Vector> shift_;
  std::vector<std::vector<std::int32_t>> colors_;
  bool resolution_exhausted_ = false;
};

struct OverlayResult {
  CompressedQuadtree tree;
  // smallest node of a (resp. b) whose cube contains the output node, -1 if none
  std::vector<std::int32_t> from_a, from_b;
};

OverlayResult overlay(const CompressedQuadtree& a, const CompressedQuadtree& b);

// Lowest colored ancestors via an Euler-tour update list with snapshots
// every I updates.
class ColorSnapshotIndex {
 public:
  struct Entry {
    std::int32_t color;
    std::int32_t value;
  };

  ColorSnapshotIndex() = default;
  // colors[v]: (color, value) pairs of node v; value is what a query reports
  static ColorSnapshotIndex build(const CompressedQuadtree& t,
                                  const std::vector<std::vector<Entry>>& colors, int num_colors);
  // value = node id
  static ColorSnapshotIndex build(const CompressedQuadtree& t,
                                  const std::vector<std::vector<std::int32_t>>& colors, int num_colors);

  int num_colors() const { return num_colors_; }
  // entry i: value of the lowest node colored i on the root path of v, or -1
  void lowest_colored_ancestors(int v, std::vector<std::int32_t>& out) const;
  std::vector<std::int32_t> lowest_colored_ancestors(int v) const {
    std::vector<std::int32_t> out;
    lowest_colored_ancestors(v, out);
    return out;
  }
  std::size_t euler_length() const { return euler_.size(); }
  std::size_t snapshot_count() const { return num_colors_ ? snapshots_.size() / num_colors_ : 0; }
  std::size_t entry_count() const { return euler_.size() + snapshots_.size(); }

 private:
  int num_colors_ = 0;
  std::vector<Entry> euler_;
  std::vector<std::int32_t> snapshots_;  // snapshot t occupies [t*I, (t+1)*I)
  std::vector<std::int32_t> anchor_;
};

// Point location in I trees at once through their overlay.
class SimultaneousLocator {
 public:
  SimultaneousLocator() = default;
  explicit SimultaneousLocator(const std::vector<const CompressedQuadtree*>& trees);

  std::size_t tree_count() const { return count_; }
  const CompressedQuadtree& merged() const { return merged_; }
  const ColorSnapshotIndex& index() const { return index_; }
  // out[i] = node of tree i whose region contains q
  void locate_all(const Eigen::Ref<const Eigen::VectorXd>& q, std::vector<std::int32_t>& out) const;
  std::vector<std::int32_t> locate_all(const Eigen::Ref<const Eigen::VectorXd>& q) const {
    std::vector<std::int32_t> out;
    locate_all(q, out);
    return out;
  }

 private:
  std::size_t count_ = 0;
  std::optional<Vector> shift_;
  CompressedQuadtree merged_;
  ColorSnapshotIndex index_;
};

}  // namespace prox
