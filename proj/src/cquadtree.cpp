#include "prox/cquadtree.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

namespace prox {

namespace {

void sort_unique(std::vector<CanonicalCube>& cubes) {
  std::sort(cubes.begin(), cubes.end(), morton_less);
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
}

// Adds the root and every LCA of Z-order neighbours; the result is the node
// set of the minimal compressed quadtree over the input cubes.
void close_under_lca(int dim, std::vector<CanonicalCube>& cubes) {
  cubes.push_back(CanonicalCube::root(dim));
  sort_unique(cubes);
  const std::size_t n = cubes.size();
  for (std::size_t i = 0; i + 1 < n; ++i) cubes.push_back(lowest_common_ancestor(cubes[i], cubes[i + 1]));
  sort_unique(cubes);
}

bool same_shift(const std::optional<Vector>& a, const std::optional<Vector>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->size() == b->size() && *a == *b);
}

}  // namespace

struct TreeBuilder {
  // cubes must be sorted, unique, LCA-closed and contain the root
  static void assemble(CompressedQuadtree& t, const std::vector<CanonicalCube>& cubes) {
    const std::size_t n = cubes.size();
    t.nodes_.assign(n, QuadNode{});
    t.index_.clear();
    t.index_.reserve(n * 2);
    std::vector<std::int32_t> stack;
    std::vector<std::int32_t> nchild(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      QuadNode& v = t.nodes_[i];
      v.cube = cubes[i];
      while (!stack.empty() && !t.nodes_[stack.back()].cube.contains(v.cube)) stack.pop_back();
      v.parent = stack.empty() ? -1 : stack.back();
      if (v.parent >= 0) ++nchild[v.parent];
      stack.push_back(static_cast<std::int32_t>(i));
      t.index_.emplace(v.cube, static_cast<std::int32_t>(i));
    }
    std::int32_t off = 0;
    for (std::size_t i = 0; i < n; ++i) {
      t.nodes_[i].first_child = off;
      off += nchild[i];
    }
    t.children_.assign(off, -1);
    std::vector<std::int32_t> fill(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
      const std::int32_t p = t.nodes_[i].parent;
      t.children_[t.nodes_[p].first_child + fill[p]++] = static_cast<std::int32_t>(i);
    }
    for (std::size_t i = 0; i < n; ++i) t.nodes_[i].child_count = nchild[i];
  }
};

CompressedQuadtree CompressedQuadtree::from_cubes(int dim, std::vector<CanonicalCube> cubes,
                                                  const std::vector<std::int32_t>& payloads,
                                                  const std::optional<Vector>& shift) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("from_cubes: bad dimension");
  if (!payloads.empty() && payloads.size() != cubes.size())
    throw InvalidArgument("from_cubes: payload count mismatch");
  for (const auto& c : cubes)
    if (c.dim != dim || c.level > 0 || c.level < kMinLevel) throw InvalidArgument("from_cubes: bad cube");
  std::vector<std::pair<CanonicalCube, std::int32_t>> tagged;
  if (!payloads.empty())
    for (std::size_t i = 0; i < cubes.size(); ++i) tagged.emplace_back(cubes[i], payloads[i]);
  CompressedQuadtree t(dim);
  t.shift_ = shift;
  close_under_lca(dim, cubes);
  TreeBuilder::assemble(t, cubes);
  for (const auto& [c, p] : tagged) t.nodes_[t.index_.at(c)].payload = p;
  return t;
}

CompressedQuadtree CompressedQuadtree::from_points(const PointSet& ps, const std::optional<Vector>& shift) {
  const int d = ps.dim();
  if (shift) {
    if (shift->size() != d) throw InvalidArgument("from_points: shift dimension mismatch");
    for (int i = 0; i < d; ++i)
      if (!((*shift)(i) >= 0.0 && (*shift)(i) <= 0.5)) throw InvalidArgument("from_points: shift outside [0,1/2]^d");
  }
  const Eigen::Index n = ps.size();
  std::vector<CanonicalCube> leaf_of(n);
  Eigen::VectorXd u(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    u = ps.point(i);
    if (shift) u -= *shift;
    if (!in_unit_cube(u)) throw DomainError("from_points: point outside the root cube");
    leaf_of[i] = cube_containing(u, kMinLevel);
  }
  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return morton_less(leaf_of[a], leaf_of[b]);
  });

  CompressedQuadtree t(d);
  t.shift_ = shift;
  t.point_order_ = order;
  std::vector<CanonicalCube> cubes;
  std::vector<std::pair<std::int32_t, std::int32_t>> ranges;  // first, count per leaf
  for (Eigen::Index s = 0; s < n;) {
    Eigen::Index e = s + 1;
    while (e < n && leaf_of[order[e]] == leaf_of[order[s]]) {
      if (ps.point(order[e]) != ps.point(order[s])) t.resolution_exhausted_ = true;
      ++e;
    }
    cubes.push_back(leaf_of[order[s]]);
    ranges.emplace_back(static_cast<std::int32_t>(s), static_cast<std::int32_t>(e - s));
    s = e;
  }
  std::vector<CanonicalCube> leaves = cubes;
  close_under_lca(d, cubes);
  TreeBuilder::assemble(t, cubes);
  for (std::size_t j = 0; j < leaves.size(); ++j) {
    QuadNode& v = t.nodes_[t.index_.at(leaves[j])];
    v.first_point = ranges[j].first;
    v.num_points = ranges[j].second;
  }

  const std::size_t m = t.nodes_.size();
  t.bbox_lo_.setConstant(d, m, std::numeric_limits<double>::infinity());
  t.bbox_hi_.setConstant(d, m, -std::numeric_limits<double>::infinity());
  for (std::size_t vi = m; vi-- > 0;) {
    QuadNode& v = t.nodes_[vi];
    for (auto p : t.leaf_points(static_cast<int>(vi))) {
      v.count += 1;
      v.weight += ps.weight(p);
      t.bbox_lo_.col(vi) = t.bbox_lo_.col(vi).cwiseMin(ps.point(p));
      t.bbox_hi_.col(vi) = t.bbox_hi_.col(vi).cwiseMax(ps.point(p));
      if (v.rep < 0 || (ps.weight(v.rep) == 0 && ps.weight(p) > 0)) v.rep = p;
    }
    for (auto c : t.children(static_cast<int>(vi))) {
      const QuadNode& cn = t.nodes_[c];
      v.count += cn.count;
      v.weight += cn.weight;
      t.bbox_lo_.col(vi) = t.bbox_lo_.col(vi).cwiseMin(t.bbox_lo_.col(c));
      t.bbox_hi_.col(vi) = t.bbox_hi_.col(vi).cwiseMax(t.bbox_hi_.col(c));
      if (v.rep < 0 || (ps.weight(v.rep) == 0 && ps.weight(cn.rep) > 0)) v.rep = cn.rep;
    }
  }
  return t;
}

int CompressedQuadtree::locate_cell(const CanonicalCube& fine) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), fine,
                             [](const CanonicalCube& c, const QuadNode& v) { return morton_less(c, v.cube); });
  int v = static_cast<int>(it - nodes_.begin()) - 1;
  if (v < 0) v = 0;
  while (v > 0 && !nodes_[v].cube.contains(fine)) v = nodes_[v].parent;
  return v;
}

int CompressedQuadtree::locate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (nodes_.empty()) throw InvalidArgument("locate: empty tree");
  if (q.size() != dim_) throw InvalidArgument("locate: dimension mismatch");
  Vector u = q;
  if (shift_) u -= *shift_;
  if (!in_unit_cube(u)) throw DomainError("locate: query outside the root cube");
  return locate_cell(cube_containing(u, kMinLevel));
}

std::optional<int> CompressedQuadtree::find(const CanonicalCube& c) const {
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int CompressedQuadtree::lowest_containing(const CanonicalCube& c) const {
  CanonicalCube fine = c;
  fine.level = kMinLevel;
  for (int i = 0; i < c.dim; ++i) fine.corner[i] = c.fine(i);
  int v = locate_cell(fine);
  while (v > 0 && nodes_[v].cube.level < c.level) v = nodes_[v].parent;
  while (v > 0 && !nodes_[v].cube.contains(c)) v = nodes_[v].parent;
  return v;
}

std::vector<int> CompressedQuadtree::root_path(int v) const {
  std::vector<int> path;
  for (; v >= 0; v = nodes_[v].parent) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

void CompressedQuadtree::dump(std::ostream& out) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const QuadNode& v = nodes_[i];
    out << v.cube.level;
    for (int j = 0; j < dim_; ++j) out << ' ' << v.cube.corner[j];
    out << ' ' << v.count << ' ';
    const auto* cs = colors(static_cast<int>(i));
    if (!cs || cs->empty()) {
      out << '-';
    } else {
      for (std::size_t j = 0; j < cs->size(); ++j) out << (j ? "," : "") << (*cs)[j];
    }
    out << ' ' << v.payload << '\n';
  }
}

std::vector<std::string> CompressedQuadtree::audit() const {
  std::vector<std::string> issues;
  auto fail = [&](std::size_t i, const std::string& what) {
    std::ostringstream s;
    s << "node " << i << ": " << what;
    issues.push_back(s.str());
  };
  if (nodes_.empty()) return issues;
  if (!(nodes_[0].cube == CanonicalCube::root(dim_))) fail(0, "first node is not the root");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const QuadNode& v = nodes_[i];
    if (i + 1 < nodes_.size() && !morton_less(v.cube, nodes_[i + 1].cube)) fail(i, "preorder broken");
    if (i > 0) {
      if (v.parent < 0 || v.parent >= static_cast<int>(i)) {
        fail(i, "bad parent");
        continue;
      }
      const QuadNode& p = nodes_[v.parent];
      if (!(p.cube.level > v.cube.level && p.cube.contains(v.cube))) fail(i, "not strictly inside parent");
    }
    auto ch = children(static_cast<int>(i));
    for (std::size_t a = 0; a < ch.size(); ++a) {
      if (nodes_[ch[a]].parent != static_cast<int>(i)) fail(i, "child parent mismatch");
      for (std::size_t b = a + 1; b < ch.size(); ++b)
        if (!nodes_[ch[a]].cube.disjoint(nodes_[ch[b]].cube)) fail(i, "overlapping children");
    }
    if (has_points()) {
      std::int64_t c = v.num_points;
      double w = 0;
      for (auto k : ch) {
        c += nodes_[k].count;
        w += nodes_[k].weight;
        if (!((bbox_lo_.col(i).array() <= bbox_lo_.col(k).array()).all() &&
              (bbox_hi_.col(i).array() >= bbox_hi_.col(k).array()).all()))
          fail(i, "bbox does not contain child bbox");
      }
      if (c != v.count) fail(i, "count is not the sum over children");
      if (ch.empty() && v.num_points == 0) fail(i, "empty leaf");
      if (i > 0 && ch.size() + (v.num_points > 0) < 2 && v.num_points == 0) fail(i, "internal node with one child");
      (void)w;
    }
  }
  return issues;
}

OverlayResult overlay(const CompressedQuadtree& a, const CompressedQuadtree& b) {
  if (!a.empty() && !b.empty()) {
    if (a.dim() != b.dim()) throw InvalidArgument("overlay: dimension mismatch");
    if (!same_shift(a.shift(), b.shift())) throw InvalidArgument("overlay: shift mismatch");
  }
  const CompressedQuadtree& any = a.empty() ? b : a;
  std::vector<CanonicalCube> cubes;
  cubes.reserve(a.size() + b.size());
  for (const auto& v : a.nodes()) cubes.push_back(v.cube);
  for (const auto& v : b.nodes()) cubes.push_back(v.cube);
  OverlayResult r;
  if (cubes.empty()) {
    r.tree = CompressedQuadtree(any.dim());
    return r;
  }
  r.tree = CompressedQuadtree::from_cubes(any.dim(), std::move(cubes), {}, any.shift());
  const std::size_t n = r.tree.size();
  r.from_a.assign(n, -1);
  r.from_b.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const QuadNode& v = r.tree.node(static_cast<int>(i));
    const int p = v.parent;
    auto fa = a.empty() ? std::nullopt : a.find(v.cube);
    auto fb = b.empty() ? std::nullopt : b.find(v.cube);
    r.from_a[i] = fa ? *fa : (p >= 0 ? r.from_a[p] : -1);
    r.from_b[i] = fb ? *fb : (p >= 0 ? r.from_b[p] : -1);
  }
  return r;
}

ColorSnapshotIndex ColorSnapshotIndex::build(const CompressedQuadtree& t,
                                             const std::vector<std::vector<std::int32_t>>& colors,
                                             int num_colors) {
  std::vector<std::vector<Entry>> e(colors.size());
  for (std::size_t v = 0; v < colors.size(); ++v)
    for (auto c : colors[v]) e[v].push_back({c, static_cast<std::int32_t>(v)});
  return build(t, e, num_colors);
}

ColorSnapshotIndex ColorSnapshotIndex::build(const CompressedQuadtree& t,
                                             const std::vector<std::vector<Entry>>& colors, int num_colors) {
  if (num_colors < 0) throw InvalidArgument("build_color_index: negative color count");
  if (colors.size() != t.size()) throw InvalidArgument("build_color_index: one color list per node required");
  ColorSnapshotIndex idx;
  idx.num_colors_ = num_colors;
  if (num_colors == 0) return idx;
  for (const auto& cs : colors)
    for (const auto& e : cs)
      if (e.color < 0 || e.color >= num_colors) throw InvalidArgument("build_color_index: color id out of range");

  const std::size_t I = static_cast<std::size_t>(num_colors);
  std::vector<std::int32_t> state(I, -1);
  idx.snapshots_.insert(idx.snapshots_.end(), state.begin(), state.end());
  auto push = [&](Entry e) {
    state[e.color] = e.value;
    idx.euler_.push_back(e);
    if (idx.euler_.size() % I == 0) idx.snapshots_.insert(idx.snapshots_.end(), state.begin(), state.end());
  };
  // restore records: (node, entries to undo)
  std::vector<std::int32_t> stack;
  std::vector<std::vector<Entry>> undo;
  auto leave = [&]() {
    for (auto it = undo.back().rbegin(); it != undo.back().rend(); ++it) push(*it);
    undo.pop_back();
    stack.pop_back();
  };
  idx.anchor_.assign(t.size(), 0);
  for (std::size_t v = 0; v < t.size(); ++v) {
    const int p = t.node(static_cast<int>(v)).parent;
    while (!stack.empty() && stack.back() != p) leave();
    stack.push_back(static_cast<std::int32_t>(v));
    undo.emplace_back();
    for (const auto& e : colors[v]) {
      undo.back().push_back({e.color, state[e.color]});
      push(e);
    }
    idx.anchor_[v] = static_cast<std::int32_t>(idx.euler_.size());
  }
  while (!stack.empty()) leave();
  return idx;
}

void ColorSnapshotIndex::lowest_colored_ancestors(int v, std::vector<std::int32_t>& out) const {
  if (v < 0 || v >= static_cast<int>(anchor_.size())) {
    if (num_colors_ == 0) {
      out.clear();
      return;
    }
    throw InvalidArgument("lowest_colored_ancestors: unknown node");
  }
  const std::size_t I = static_cast<std::size_t>(num_colors_);
  const std::size_t p = static_cast<std::size_t>(anchor_[v]);
  const std::size_t t = p / I;
  out.assign(snapshots_.begin() + t * I, snapshots_.begin() + (t + 1) * I);
  for (std::size_t j = t * I; j < p; ++j) out[euler_[j].color] = euler_[j].value;
}

SimultaneousLocator::SimultaneousLocator(const std::vector<const CompressedQuadtree*>& trees)
    : count_(trees.size()) {
  if (trees.empty()) throw InvalidArgument("locate_all: no trees");
  const int dim = trees[0]->dim();
  for (const auto* t : trees) {
    if (t->empty() || t->dim() != dim) throw InvalidArgument("locate_all: trees must be non-empty with equal dimension");
    if (!same_shift(t->shift(), trees[0]->shift())) throw InvalidArgument("locate_all: shift mismatch");
  }
  // k-way merge of the preorder node lists
  struct Head {
    std::int32_t tree, node;
  };
  auto greater = [&](const Head& x, const Head& y) {
    const auto& cx = trees[x.tree]->node(x.node).cube;
    const auto& cy = trees[y.tree]->node(y.node).cube;
    if (morton_less(cy, cx)) return true;
    if (morton_less(cx, cy)) return false;
    return x.tree > y.tree;
  };
  std::priority_queue<Head, std::vector<Head>, decltype(greater)> heap(greater);
  for (std::size_t i = 0; i < trees.size(); ++i) heap.push({static_cast<std::int32_t>(i), 0});
  std::vector<CanonicalCube> cubes;
  std::vector<std::vector<ColorSnapshotIndex::Entry>> sources;
  while (!heap.empty()) {
    Head h = heap.top();
    heap.pop();
    const auto& c = trees[h.tree]->node(h.node).cube;
    if (cubes.empty() || !(cubes.back() == c)) {
      cubes.push_back(c);
      sources.emplace_back();
    }
    sources.back().push_back({h.tree, h.node});
    if (h.node + 1 < static_cast<std::int32_t>(trees[h.tree]->size())) heap.push({h.tree, h.node + 1});
  }
  merged_ = CompressedQuadtree::from_cubes(dim, cubes);
  std::vector<std::vector<ColorSnapshotIndex::Entry>> colors(merged_.size());
  std::vector<std::vector<std::int32_t>> color_ids(merged_.size());
  for (std::size_t j = 0; j < cubes.size(); ++j) {
    const int v = *merged_.find(cubes[j]);
    colors[v] = sources[j];
    for (const auto& e : sources[j]) color_ids[v].push_back(e.color);
  }
  index_ = ColorSnapshotIndex::build(merged_, colors, static_cast<int>(trees.size()));
  merged_.set_colors(std::move(color_ids));
  shift_ = trees[0]->shift();
}

void SimultaneousLocator::locate_all(const Eigen::Ref<const Eigen::VectorXd>& q,
                                     std::vector<std::int32_t>& out) const {
  Vector u = q;
  if (shift_) u -= *shift_;
  if (u.size() != merged_.dim()) throw InvalidArgument("locate_all: dimension mismatch");
  if (!in_unit_cube(u)) throw DomainError("locate_all: query outside the root cube");
  index_.lowest_colored_ancestors(merged_.locate_cell(cube_containing(u, kMinLevel)), out);
}

}  // namespace prox
