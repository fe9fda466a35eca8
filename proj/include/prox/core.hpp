#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "prox/errors.hpp"

namespace prox {

// Largest supported ambient dimension. Lifted points live in d+1, so
// input data may have at most kMaxDim-1 coordinates.
inline constexpr int kMaxDim = 8;
inline constexpr int kMinLevel = -52;
inline constexpr double kSyntheticCoord = 4.0;

template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Vector = VectorT<double>;
using LatticeId = VectorT<std::int64_t>;

// ||u||_+ : euclidean norm of all but the last coordinate, plus |last|.
template <typename Derived>
typename Derived::Scalar product_norm(const Eigen::MatrixBase<Derived>& u) {
  const Eigen::Index n = u.size();
  if (n < 1) throw InvalidArgument("product_norm: empty vector");
  if (!u.allFinite()) throw InvalidArgument("product_norm: non-finite input");
  using std::abs;
  return u.head(n - 1).norm() + abs(u(n - 1));
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar distance(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedB>& b) {
  return (a - b).norm();
}

// (c, r) as a point in R^{d+1}
template <typename Derived>
VectorT<typename Derived::Scalar> lift(const Eigen::MatrixBase<Derived>& c,
                                       typename Derived::Scalar r) {
  VectorT<typename Derived::Scalar> out(c.size() + 1);
  out.head(c.size()) = c;
  out(c.size()) = r;
  return out;
}

struct Ball {
  Vector center;
  double radius = 0.0;
};

// Cell of the uniform grid of width alpha, half-open [x, x+alpha).
LatticeId grid_cell(const Eigen::Ref<const Eigen::VectorXd>& p, double width);

struct CanonicalCube {
  int dim = 0;
  int level = 0;  // side 2^level
  std::array<std::uint64_t, kMaxDim> corner{};

  double side() const { return std::ldexp(1.0, level); }
  double low(int i) const { return std::ldexp(static_cast<double>(corner[i]), level); }
  double center(int i) const { return low(i) + 0.5 * side(); }
  Vector center() const;
  double half_diagonal() const { return 0.5 * side() * std::sqrt(double(dim)); }

  bool contains(const CanonicalCube& o) const;
  bool disjoint(const CanonicalCube& o) const { return !contains(o) && !o.contains(*this); }
  CanonicalCube parent() const;
  CanonicalCube child(unsigned mask) const;

  // corner scaled to the finest lattice (kMinLevel)
  std::uint64_t fine(int i) const { return corner[i] << (level - kMinLevel); }

  static CanonicalCube root(int dim) {
    CanonicalCube c;
    c.dim = dim;
    return c;
  }

  friend bool operator==(const CanonicalCube& a, const CanonicalCube& b) {
    if (a.dim != b.dim || a.level != b.level) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.corner[i] != b.corner[i]) return false;
    return true;
  }
};

struct CubeHash {
  std::size_t operator()(const CanonicalCube& c) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(c.level + 1024);
    for (int i = 0; i < c.dim; ++i) {
      h ^= c.corner[i] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 33));
  }
};

// Z-order on low corners with ancestors first; this is a preorder of the quadtree.
bool morton_less(const CanonicalCube& a, const CanonicalCube& b);

// Smallest canonical cube containing both.
CanonicalCube lowest_common_ancestor(const CanonicalCube& a, const CanonicalCube& b);

// Canonical cube of the given level containing p; p must lie in [0,1]^d.
// Coordinates equal to 1 are clamped into the last cell.
CanonicalCube cube_containing(const Eigen::Ref<const Eigen::VectorXd>& p, int level);

// Canonical cubes of side 2^floor(log2 psi) whose closed cube meets the closed ball.
std::vector<CanonicalCube> cells_intersecting_ball(const Ball& b, double psi,
                                                   int min_level = kMinLevel);

// squared distance from q to the nearest / farthest point of the box [lo, hi]
template <typename DQ, typename DL, typename DH>
double box_min_dist2(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DL>& lo,
                     const Eigen::MatrixBase<DH>& hi) {
  double s = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    double t = 0;
    if (q(i) < lo(i)) t = lo(i) - q(i);
    else if (q(i) > hi(i)) t = q(i) - hi(i);
    s += t * t;
  }
  return s;
}

template <typename DQ, typename DL, typename DH>
double box_max_dist2(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DL>& lo,
                     const Eigen::MatrixBase<DH>& hi) {
  double s = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    double t = std::max(std::abs(q(i) - lo(i)), std::abs(q(i) - hi(i)));
    s += t * t;
  }
  return s;
}

double cube_min_dist(const CanonicalCube& c, const Eigen::Ref<const Eigen::VectorXd>& q);

// input = scale * normalized + translation
struct Transform {
  double scale = 1.0;
  Eigen::VectorXd translation;

  Eigen::VectorXd to_input(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return scale * x + translation;
  }
  Eigen::VectorXd to_normalized(const Eigen::Ref<const Eigen::VectorXd>& y) const {
    return (y - translation) / scale;
  }
};

class PointSet {
 public:
  PointSet() = default;
  // coords is d x n, one point per column
  explicit PointSet(Eigen::MatrixXd coords, Eigen::VectorXd weights = {},
                    std::vector<bool> synthetic = {}, Transform transform = {});

  int dim() const { return static_cast<int>(coords_.rows()); }
  Eigen::Index size() const { return coords_.cols(); }
  Eigen::Index real_count() const { return real_count_; }

  auto point(Eigen::Index i) const { return coords_.col(i); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  double weight(Eigen::Index i) const { return weights_(i); }
  const Eigen::VectorXd& weights() const { return weights_; }
  bool synthetic(Eigen::Index i) const { return synthetic_[i]; }
  const std::vector<bool>& synthetic_mask() const { return synthetic_; }
  const Transform& transform() const { return transform_; }
  bool unit_weights() const;
  double total_weight() const { return weights_.sum(); }

  // copy holding only the non-synthetic points, plus their original indices
  PointSet real_points(std::vector<Eigen::Index>* index_map = nullptr) const;

 private:
  Eigen::MatrixXd coords_;
  Eigen::VectorXd weights_;
  std::vector<bool> synthetic_;
  Transform transform_;
  Eigen::Index real_count_ = 0;
};

// Similarity map of raw d x n points into [1/2, 1/2+1/n]^d.
PointSet normalize(const Eigen::MatrixXd& raw, const Eigen::VectorXd& weights = {});

PointSet pad_to_multiple(const PointSet& ps, long k);

bool in_unit_cube(const Eigen::Ref<const Eigen::VectorXd>& q);

}  // namespace prox

template <>
struct std::hash<prox::CanonicalCube> : prox::CubeHash {};
