#include "prox/knn_query.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace prox {

namespace {

struct Item {
  std::int32_t node;
  std::int32_t level;
  double lo, hi;  // distance interval of the node's bbox
  double mass;    // count or weight
  double diam;
};

struct Endpoint {
  double x;
  double mass;
  bool operator<(const Endpoint& o) const { return x < o.x; }
};

// smallest x with (mass of endpoints <= x) >= need
double crossing(std::vector<Endpoint>& e, double need) {
  std::sort(e.begin(), e.end());
  double acc = 0;
  for (const auto& p : e) {
    acc += p.mass;
    if (acc >= need) return p.x;
  }
  return e.empty() ? 0.0 : e.back().x;
}

}  // namespace

KnnQueryStructure KnnQueryStructure::build(const PointSet& ps, std::uint64_t seed, double c) {
  if (!(c > 2)) throw InvalidArgument("knn_query: confidence exponent must exceed 2");
  KnnQueryStructure s;
  s.points_ = ps.real_points(&s.index_map_);
  s.seed_ = seed;
  s.c_ = c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  s.shift_ = Vector(ps.dim());
  for (int i = 0; i < ps.dim(); ++i) s.shift_(i) = u(rng);
  s.tree_ = CompressedQuadtree::from_points(s.points_, s.shift_);
  s.total_weight_ = s.points_.total_weight();
  return s;
}

template <bool Weighted>
int KnnQueryStructure::rough_node(const Eigen::Ref<const Eigen::VectorXd>& q, double need) const {
  Vector u = q - shift_;
  int leaf = 0;
  if (in_unit_cube(u)) leaf = tree_.locate_cell(cube_containing(u, kMinLevel));
  const auto path = tree_.root_path(leaf);
  auto mass = [&](int v) { return Weighted ? tree_.node(v).weight : double(tree_.node(v).count); };
  // masses are non-increasing along the path; find the last one >= need
  std::size_t lo = 0, hi = path.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (mass(path[mid]) >= need) lo = mid;
    else hi = mid - 1;
  }
  return path[lo];
}

double KnnQueryStructure::rough_knn_distance(const Eigen::Ref<const Eigen::VectorXd>& q, long k) const {
  if (k < 1 || k > size()) throw InvalidArgument("rough_knn_distance: k out of range");
  if (q.size() != points_.dim()) throw InvalidArgument("rough_knn_distance: dimension mismatch");
  const int v = rough_node<false>(q, static_cast<double>(k));
  return std::sqrt(box_max_dist2(q, tree_.bbox_lo(v), tree_.bbox_hi(v)));
}

double KnnQueryStructure::rough_weighted_distance(const Eigen::Ref<const Eigen::VectorXd>& q, double tau) const {
  if (!(tau > 0) || tau > total_weight_) throw InvalidArgument("rough_weighted_distance: tau out of range");
  if (q.size() != points_.dim()) throw InvalidArgument("rough_weighted_distance: dimension mismatch");
  const int v = rough_node<true>(q, tau);
  return std::sqrt(box_max_dist2(q, tree_.bbox_lo(v), tree_.bbox_hi(v)));
}

KnnResult KnnQueryStructure::knn_distance(const Eigen::Ref<const Eigen::VectorXd>& q, long k, double eps,
                                          const KnnOptions& opt) const {
  if (k < 1 || k > size()) throw InvalidArgument("knn_distance: k out of range");
  return refine<false>(q, static_cast<double>(k), eps, opt);
}

KnnResult KnnQueryStructure::knn_distance_weighted(const Eigen::Ref<const Eigen::VectorXd>& q, double tau,
                                                   double eps, const KnnOptions& opt) const {
  if (!(tau > 0) || tau > total_weight_) throw InvalidArgument("knn_distance_weighted: tau out of range");
  return refine<true>(q, tau, eps, opt);
}

template <bool Weighted>
KnnResult KnnQueryStructure::refine(const Eigen::Ref<const Eigen::VectorXd>& q, double need, double eps,
                                    const KnnOptions& opt) const {
  if (!(eps > 0 && eps <= 1)) throw InvalidArgument("knn_distance: eps must lie in (0,1]");
  if (q.size() != points_.dim()) throw InvalidArgument("knn_distance: dimension mismatch");
  if (!q.allFinite()) throw InvalidArgument("knn_distance: non-finite query");
  if (opt.check_domain && !in_unit_cube(q)) throw DomainError("knn_distance: query outside [0,1]^d");

  auto mass_of = [&](int v) { return Weighted ? tree_.node(v).weight : double(tree_.node(v).count); };
  auto point_dist = [&](Eigen::Index p) { return (points_.point(p) - q).norm(); };

  const int nu = rough_node<Weighted>(q, need);
  const double R = std::sqrt(box_max_dist2(q, tree_.bbox_lo(nu), tree_.bbox_hi(nu)));
  if (opt.trace) {
    *opt.trace = KnnTrace{};
    opt.trace->rough = R;
  }
  if (R == 0.0) return {0.0, index_map_[tree_.node(nu).rep]};

  auto make = [&](int v) {
    const auto lo = tree_.bbox_lo(v);
    const auto hi = tree_.bbox_hi(v);
    return Item{v, tree_.node(v).cube.level, std::sqrt(box_min_dist2(q, lo, hi)),
                std::sqrt(box_max_dist2(q, lo, hi)), mass_of(v), (hi - lo).norm()};
  };

  std::vector<Item> frontier{make(0)}, next;
  std::vector<Endpoint> ends;
  double residual = need;
  const double slack = eps / 8.0;
  while (true) {
    ends.clear();
    for (const auto& it : frontier) ends.push_back({it.lo, it.mass});
    const double lo = crossing(ends, residual);
    ends.clear();
    for (const auto& it : frontier) ends.push_back({it.hi, it.mass});
    const double hi = std::min(crossing(ends, residual), R);
    if (opt.trace) {
      opt.trace->lo.push_back(lo);
      opt.trace->hi.push_back(hi);
      opt.trace->frontier.push_back(frontier.size());
    }
    if (hi == 0.0) {
      for (const auto& it : frontier)
        if (it.hi == 0.0 && it.mass > 0) return {0.0, index_map_[tree_.node(it.node).rep]};
    }

    // prune and collect expansion candidates
    next.clear();
    const double thresh = slack * lo;
    int sweep = kMinLevel - 1;
    for (const auto& it : frontier) {
      const bool left = it.hi < lo, right = it.lo > hi;
      if (opt.prune && (left || right)) {
        if (left) residual -= it.mass;
        continue;
      }
      next.push_back(it);
      if (!left && !right && it.diam > thresh && tree_.node(it.node).child_count > 0)
        sweep = std::max(sweep, it.level);
    }
    frontier.swap(next);
    if (opt.trace) opt.trace->live.push_back(frontier.size());

    if (sweep < kMinLevel) {
      Eigen::Index best = -1;
      double best_d = -1;
      for (const auto& it : frontier) {
        if (it.hi < lo || it.lo > hi) continue;
        const Eigen::Index p = tree_.node(it.node).rep;
        const double dp = point_dist(p);
        if (dp > best_d) {
          best_d = dp;
          best = p;
        }
      }
      return {hi, index_map_[best], lo};
    }

    // expand every relevant node of the current sweep level; lower (frozen) nodes wait
    next.clear();
    for (const auto& it : frontier) {
      const bool relevant = !(it.hi < lo || it.lo > hi);
      if (relevant && it.level == sweep && it.diam > thresh && tree_.node(it.node).child_count > 0) {
        for (auto c : tree_.children(it.node)) {
          if (Weighted && tree_.node(c).weight <= 0) continue;
          next.push_back(make(c));
        }
        if (tree_.node(it.node).num_points > 0) next.push_back(it);  // cannot happen for finest leaves
      } else {
        next.push_back(it);
      }
    }
    frontier.swap(next);
  }
}

template KnnResult KnnQueryStructure::refine<false>(const Eigen::Ref<const Eigen::VectorXd>&, double, double,
                                                    const KnnOptions&) const;
template KnnResult KnnQueryStructure::refine<true>(const Eigen::Ref<const Eigen::VectorXd>&, double, double,
                                                   const KnnOptions&) const;

}  // namespace prox
