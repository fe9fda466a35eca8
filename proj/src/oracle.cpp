#include "prox/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prox::oracle {

namespace {

double dist(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  double s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

void check_query(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (q.size() != ps.dim()) throw InvalidArgument("oracle: query dimension mismatch");
  if (!q.allFinite()) throw InvalidArgument("oracle: non-finite query");
}

}  // namespace

std::vector<double> sorted_distances(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q) {
  check_query(ps, q);
  std::vector<double> d;
  d.reserve(ps.real_count());
  for (Eigen::Index i = 0; i < ps.size(); ++i)
    if (!ps.synthetic(i)) d.push_back(dist(ps.point(i), q));
  std::sort(d.begin(), d.end());
  return d;
}

double exact_knn_distance(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, long k) {
  if (k < 1 || k > ps.real_count()) throw InvalidArgument("exact_knn_distance: k out of range");
  return sorted_distances(ps, q)[k - 1];
}

double exact_knn_distance_select(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, long k) {
  if (k < 1 || k > ps.real_count()) throw InvalidArgument("exact_knn_distance: k out of range");
  check_query(ps, q);
  std::vector<double> d;
  for (Eigen::Index i = 0; i < ps.size(); ++i)
    if (!ps.synthetic(i)) d.push_back((ps.point(i) - q).norm());
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  return d[k - 1];
}

double exact_weighted_distance(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, double tau) {
  check_query(ps, q);
  std::vector<std::pair<double, double>> dw;
  double total = 0;
  for (Eigen::Index i = 0; i < ps.size(); ++i)
    if (!ps.synthetic(i)) {
      dw.emplace_back(dist(ps.point(i), q), ps.weight(i));
      total += ps.weight(i);
    }
  if (!(tau > 0) || tau > total) throw InvalidArgument("exact_weighted_distance: tau out of range");
  std::sort(dw.begin(), dw.end());
  double acc = 0;
  for (const auto& [d, w] : dw) {
    acc += w;
    if (acc >= tau) return d;
  }
  return dw.back().first;
}

DensityValues exact_density(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, long k,
                            const std::function<double(double)>& f, double eps) {
  if (k < 1 || k > ps.real_count()) throw InvalidArgument("exact_density: k out of range");
  auto d = sorted_distances(ps, q);
  DensityValues out;
  out.d.assign(d.begin(), d.begin() + k);
  const long i0 = std::max<long>(1, static_cast<long>(std::ceil(k * eps / 8.0)));
  for (long i = 1; i <= k; ++i) {
    const double v = f(d[i - 1]);
    out.D += v;
    if (i >= i0) out.aD += v;
  }
  out.F = out.D / static_cast<double>(k);
  return out;
}

double centered_kball_radius(const PointSet& ps, const std::vector<Eigen::Index>& remaining, long k) {
  if (k < 1 || k > static_cast<long>(remaining.size())) throw InvalidArgument("centered_kball_radius: k out of range");
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> d(remaining.size());
  for (auto p : remaining) {
    for (std::size_t j = 0; j < remaining.size(); ++j) d[j] = dist(ps.point(p), ps.point(remaining[j]));
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    best = std::min(best, d[k - 1]);
  }
  return best;
}

double centered_weighted_radius(const PointSet& ps, const std::vector<Eigen::Index>& remaining, double tau,
                                const std::vector<double>* extra_weights) {
  auto weight = [&](Eigen::Index i) {
    return extra_weights ? (*extra_weights)[i] : ps.weight(i);
  };
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> dw(remaining.size());
  for (auto p : remaining) {
    for (std::size_t j = 0; j < remaining.size(); ++j)
      dw[j] = {dist(ps.point(p), ps.point(remaining[j])), weight(remaining[j])};
    std::sort(dw.begin(), dw.end());
    double acc = 0;
    for (const auto& [d, w] : dw) {
      acc += w;
      if (acc >= tau) {
        best = std::min(best, d);
        break;
      }
    }
  }
  if (!std::isfinite(best)) throw InvalidArgument("centered_weighted_radius: tau exceeds remaining weight");
  return best;
}

}  // namespace prox::oracle
