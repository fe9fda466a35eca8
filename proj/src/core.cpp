#include "prox/core.hpp"

#include <algorithm>
#include <bit>
#include <limits>

namespace prox {

namespace {

inline bool less_msb(std::uint64_t x, std::uint64_t y) { return x < y && x < (x ^ y); }

}  // namespace

LatticeId grid_cell(const Eigen::Ref<const Eigen::VectorXd>& p, double width) {
  if (!(width > 0) || !std::isfinite(width)) throw InvalidArgument("grid_cell: width must be positive");
  if (!p.allFinite()) throw InvalidArgument("grid_cell: non-finite point");
  LatticeId id(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    id(i) = static_cast<std::int64_t>(std::floor(p(i) / width));
  return id;
}

Vector CanonicalCube::center() const {
  Vector c(dim);
  for (int i = 0; i < dim; ++i) c(i) = center(i);
  return c;
}

bool CanonicalCube::contains(const CanonicalCube& o) const {
  if (level < o.level) return false;
  const int shift = level - o.level;
  for (int i = 0; i < dim; ++i)
    if ((o.corner[i] >> shift) != corner[i]) return false;
  return true;
}

CanonicalCube CanonicalCube::parent() const {
  CanonicalCube p = *this;
  p.level = level + 1;
  for (int i = 0; i < dim; ++i) p.corner[i] = corner[i] >> 1;
  return p;
}

CanonicalCube CanonicalCube::child(unsigned mask) const {
  CanonicalCube c = *this;
  c.level = level - 1;
  for (int i = 0; i < dim; ++i) c.corner[i] = (corner[i] << 1) | ((mask >> i) & 1U);
  return c;
}

bool morton_less(const CanonicalCube& a, const CanonicalCube& b) {
  int best = 0;
  std::uint64_t bx = 0;
  for (int i = 0; i < a.dim; ++i) {
    const std::uint64_t x = a.fine(i) ^ b.fine(i);
    if (less_msb(bx, x)) {
      bx = x;
      best = i;
    }
  }
  if (bx == 0) return a.level > b.level;
  return a.fine(best) < b.fine(best);
}

CanonicalCube lowest_common_ancestor(const CanonicalCube& a, const CanonicalCube& b) {
  std::uint64_t x = 0;
  for (int i = 0; i < a.dim; ++i) x |= a.fine(i) ^ b.fine(i);
  int level = std::max(a.level, b.level);
  if (x != 0) level = std::max(level, kMinLevel + (63 - std::countl_zero(x)) + 1);
  level = std::min(level, 0);
  CanonicalCube c;
  c.dim = a.dim;
  c.level = level;
  for (int i = 0; i < a.dim; ++i) c.corner[i] = a.fine(i) >> (level - kMinLevel);
  return c;
}

CanonicalCube cube_containing(const Eigen::Ref<const Eigen::VectorXd>& p, int level) {
  if (level > 0 || level < kMinLevel) throw InvalidArgument("cube_containing: level out of range");
  if (!in_unit_cube(p)) throw DomainError("cube_containing: point outside [0,1]^d");
  CanonicalCube c;
  c.dim = static_cast<int>(p.size());
  c.level = level;
  const std::uint64_t last = (std::uint64_t{1} << (-level)) - 1;
  for (int i = 0; i < c.dim; ++i) {
    const double s = std::floor(std::ldexp(p(i), -level));
    c.corner[i] = std::min(static_cast<std::uint64_t>(s), last);
  }
  return c;
}

namespace {

struct BallScan {
  const Ball* b;
  double side;
  double r2;
  std::int64_t lo[kMaxDim], hi[kMaxDim];
  CanonicalCube cur;
  std::vector<CanonicalCube>* out;

  void run(int axis, double acc) {
    if (axis == cur.dim) {
      out->push_back(cur);
      return;
    }
    const double c = b->center(axis);
    for (std::int64_t i = lo[axis]; i <= hi[axis]; ++i) {
      const double a0 = static_cast<double>(i) * side, a1 = a0 + side;
      double t = 0;
      if (c < a0) t = a0 - c;
      else if (c > a1) t = c - a1;
      const double s = acc + t * t;
      if (s > r2) continue;
      cur.corner[axis] = static_cast<std::uint64_t>(i);
      run(axis + 1, s);
    }
  }
};

}  // namespace

std::vector<CanonicalCube> cells_intersecting_ball(const Ball& b, double psi, int min_level) {
  if (!(psi > 0) || !std::isfinite(psi)) throw InvalidArgument("cells_intersecting_ball: psi must be positive");
  if (!(b.radius >= 0) || !b.center.allFinite()) throw InvalidArgument("cells_intersecting_ball: bad ball");
  const int dim = static_cast<int>(b.center.size());
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("cells_intersecting_ball: bad dimension");
  int e = 0;
  std::frexp(psi, &e);
  int level = std::min(e - 1, 0);
  if (level < std::max(min_level, kMinLevel))
    throw ResolutionExhausted("cells_intersecting_ball: side below minimum level");

  BallScan scan;
  scan.b = &b;
  scan.side = std::ldexp(1.0, level);
  scan.r2 = b.radius * b.radius;
  const std::int64_t last = (std::int64_t{1} << (-level)) - 1;
  for (int i = 0; i < dim; ++i) {
    const double lo = std::ceil((b.center(i) - b.radius) / scan.side) - 1;
    const double hi = std::floor((b.center(i) + b.radius) / scan.side);
    if (hi < 0 || lo > static_cast<double>(last)) return {};
    scan.lo[i] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::max(lo, -1.0)));
    scan.hi[i] = std::min<std::int64_t>(last, static_cast<std::int64_t>(std::min(hi, double(last))));
  }
  scan.cur.dim = dim;
  scan.cur.level = level;
  std::vector<CanonicalCube> out;
  scan.out = &out;
  scan.run(0, 0.0);
  return out;
}

double cube_min_dist(const CanonicalCube& c, const Eigen::Ref<const Eigen::VectorXd>& q) {
  const double s = c.side();
  double acc = 0;
  for (int i = 0; i < c.dim; ++i) {
    const double a0 = c.low(i), a1 = a0 + s;
    double t = 0;
    if (q(i) < a0) t = a0 - q(i);
    else if (q(i) > a1) t = q(i) - a1;
    acc += t * t;
  }
  return std::sqrt(acc);
}

bool in_unit_cube(const Eigen::Ref<const Eigen::VectorXd>& q) {
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (!(q(i) >= 0.0 && q(i) <= 1.0)) return false;
  return true;
}

PointSet::PointSet(Eigen::MatrixXd coords, Eigen::VectorXd weights, std::vector<bool> synthetic,
                   Transform transform)
    : coords_(std::move(coords)), weights_(std::move(weights)), synthetic_(std::move(synthetic)),
      transform_(std::move(transform)) {
  if (coords_.cols() < 1) throw InvalidArgument("PointSet: empty");
  if (coords_.rows() < 1 || coords_.rows() > kMaxDim) throw InvalidArgument("PointSet: unsupported dimension");
  if (!coords_.allFinite()) throw InvalidArgument("PointSet: non-finite coordinate");
  if (weights_.size() == 0) weights_ = Eigen::VectorXd::Ones(coords_.cols());
  if (weights_.size() != coords_.cols()) throw InvalidArgument("PointSet: weight count mismatch");
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (!(weights_(i) >= 0) || !std::isfinite(weights_(i))) throw InvalidArgument("PointSet: weights must be finite and >= 0");
  if (synthetic_.empty()) synthetic_.assign(coords_.cols(), false);
  if (static_cast<Eigen::Index>(synthetic_.size()) != coords_.cols())
    throw InvalidArgument("PointSet: synthetic mask size mismatch");
  if (transform_.translation.size() == 0) transform_.translation = Eigen::VectorXd::Zero(coords_.rows());
  real_count_ = std::count(synthetic_.begin(), synthetic_.end(), false);
}

bool PointSet::unit_weights() const { return (weights_.array() == 1.0).all(); }

PointSet PointSet::real_points(std::vector<Eigen::Index>* index_map) const {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (!synthetic_[i]) idx.push_back(i);
  if (idx.empty()) throw InvalidArgument("PointSet: no real points");
  Eigen::MatrixXd c(dim(), idx.size());
  Eigen::VectorXd w(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    c.col(j) = coords_.col(idx[j]);
    w(j) = weights_(idx[j]);
  }
  if (index_map) *index_map = idx;
  return PointSet(std::move(c), std::move(w), {}, transform_);
}

PointSet normalize(const Eigen::MatrixXd& raw, const Eigen::VectorXd& weights) {
  if (raw.cols() < 1) throw InvalidArgument("normalize: empty input");
  if (!raw.allFinite()) throw InvalidArgument("normalize: non-finite coordinate");
  const Eigen::VectorXd lo = raw.rowwise().minCoeff();
  const Eigen::VectorXd hi = raw.rowwise().maxCoeff();
  const double extent = (hi - lo).maxCoeff();
  Transform t;
  Eigen::MatrixXd x;
  if (extent == 0.0) {
    t.scale = 1.0;
    t.translation = lo.array() - 0.5;
    x = Eigen::MatrixXd::Constant(raw.rows(), raw.cols(), 0.5);
  } else {
    const double n = static_cast<double>(raw.cols());
    t.scale = extent * n;
    t.translation = lo.array() - 0.5 * t.scale;
    x = ((raw.colwise() - lo) / t.scale).array() + 0.5;
  }
  return PointSet(std::move(x), weights, {}, std::move(t));
}

PointSet pad_to_multiple(const PointSet& ps, long k) {
  if (k < 1) throw InvalidArgument("pad_to_multiple: k must be >= 1");
  const long n = static_cast<long>(ps.size());
  const long extra = (k - n % k) % k;
  if (extra == 0) return ps;
  Eigen::MatrixXd c(ps.dim(), n + extra);
  c.leftCols(n) = ps.coords();
  c.rightCols(extra).setConstant(kSyntheticCoord);
  Eigen::VectorXd w(n + extra);
  w.head(n) = ps.weights();
  w.tail(extra).setOnes();
  std::vector<bool> syn = ps.synthetic_mask();
  syn.resize(n + extra, true);
  return PointSet(std::move(c), std::move(w), std::move(syn), ps.transform());
}

}  // namespace prox
