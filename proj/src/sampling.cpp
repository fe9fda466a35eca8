#include "prox/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "prox/errors.hpp"

namespace prox {

long relative_sample_size(const SampleSpec& s, long n) {
  if (!(s.rho > 0 && s.rho <= 1)) throw InvalidArgument("sample size: rho must lie in (0,1]");
  if (!(s.eps > 0 && s.eps < 1)) throw InvalidArgument("sample size: eps must lie in (0,1)");
  if (!(s.phi > 0 && s.phi < 1)) throw InvalidArgument("sample size: phi must lie in (0,1)");
  if (!(s.vc_dim > 0 && s.C > 0)) throw InvalidArgument("sample size: vc_dim and C must be positive");
  const double m = std::ceil(s.C * s.vc_dim / (s.eps * s.eps * s.rho) * (std::log(1 / s.rho) + std::log(1 / s.phi)));
  return n > 0 ? static_cast<long>(std::min<double>(m, n)) : static_cast<long>(m);
}

double dnu_distance(double r, double s, double nu) {
  if (!(r >= 0 && s >= 0 && nu > 0)) throw InvalidArgument("d_nu: needs r, s >= 0 and nu > 0");
  return std::abs(r - s) / (r + s + nu);
}

double clipped_weight(const std::function<double(double)>& f, double dist, double r, double anchor) {
  if (dist > r) return 0.0;
  if (!(anchor > 0)) throw InvalidArgument("clipped weight: anchor value must be positive");
  const double h = f(dist) / anchor;
  if (!(h >= 0 && h <= 1 + 1e-12)) throw ContractViolation("clipped weight outside [0,1]");
  return std::min(h, 1.0);
}

namespace {

double kth(std::vector<double>& d, long i) {
  i = std::clamp<long>(i, 1, static_cast<long>(d.size()));
  std::nth_element(d.begin(), d.begin() + (i - 1), d.end());
  return d[i - 1];
}

std::vector<double> distances_to(const Eigen::MatrixXd& pts, const Eigen::Ref<const Eigen::VectorXd>& q) {
  std::vector<double> d(pts.cols());
  for (Eigen::Index j = 0; j < pts.cols(); ++j) d[j] = (pts.col(j) - q).norm();
  return d;
}

// real points drawn with replacement, or all of them once when m reaches n
std::vector<Eigen::Index> draw(const PointSet& real, long m, bool exact, std::uint64_t seed) {
  std::vector<Eigen::Index> ids;
  if (exact) {
    for (Eigen::Index j = 0; j < real.size(); ++j) ids.push_back(j);
    return ids;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, real.size() - 1);
  for (long i = 0; i < m; ++i) ids.push_back(pick(rng));
  return ids;
}

}  // namespace

void audit_well_behaved(const PointSet& ps, long k, const std::function<double(double)>& f, double zeta2,
                        const std::vector<Eigen::VectorXd>& queries) {
  const auto real = ps.real_points();
  const long hi = std::min<long>(static_cast<long>(std::ceil(1.5 * k)), real.size());
  const long lo = std::max<long>(1, k / 4);
  for (const auto& q : queries) {
    auto d = distances_to(real.coords(), q);
    const double a = f(kth(d, hi)), b = f(kth(d, lo));
    if (a > zeta2 * b * (1 + 1e-12)) {
      std::ostringstream m;
      m << "function is not well behaved: f(d_" << hi << ")=" << a << " exceeds zeta2=" << zeta2 << " times f(d_"
        << lo << ")=" << b;
      throw InvalidFunction(m.str());
    }
  }
}

bool binomial_guard(int successes, int trials, double p0, double alpha) {
  if (trials <= 0) return true;
  if (successes >= p0 * trials) return true;
  // P[X <= successes] under Binomial(trials, p0)
  double cdf = 0;
  for (int i = 0; i <= successes; ++i)
    cdf += std::exp(std::lgamma(trials + 1.0) - std::lgamma(i + 1.0) - std::lgamma(trials - i + 1.0) +
                    i * std::log(p0) + (trials - i) * std::log1p(-p0));
  return cdf >= alpha;
}

SampledKnn SampledKnn::build(const PointSet& ps, long k, double eps, double phi, std::uint64_t seed, double C) {
  const auto real = ps.real_points();
  const long n = static_cast<long>(real.size());
  if (k < 1 || k > n) throw InvalidArgument("sampled knn: k out of range");
  SampledKnn s;
  s.n_ = n;
  s.k_ = k;
  s.eps_ = eps;
  s.m_ = relative_sample_size({double(k) / n, eps, phi, double(ps.dim() + 1), C}, n);
  s.exact_ = s.m_ >= n;
  if (s.k_prime() < 1) throw InvalidArgument("sampled knn: parameters too coarse (k' = 0)");
  s.ids_ = draw(real, s.m_, s.exact_, seed);
  Eigen::MatrixXd pts(ps.dim(), s.ids_.size());
  for (std::size_t i = 0; i < s.ids_.size(); ++i) pts.col(i) = real.point(s.ids_[i]);
  // back to indices of ps
  std::vector<Eigen::Index> map;
  ps.real_points(&map);
  for (auto& id : s.ids_) id = map[id];
  s.knn_ = KnnQueryStructure::build(PointSet(std::move(pts)), seed);
  return s;
}

long SampledKnn::scaled(long t) const {
  if (exact_) return t;
  return std::min<long>(m_, std::lround(double(t) * m_ / n_));
}

SampledAnswer SampledKnn::query_rank(const Eigen::Ref<const Eigen::VectorXd>& q, long t) const {
  if (t < 1 || t > n_) throw InvalidArgument("sampled knn: rank out of range");
  const long tp = scaled(t);
  if (tp < 1) throw InvalidArgument("sampled knn: parameters too coarse (t' = 0)");
  const auto r = knn_.knn_distance(q, tp, eps_);
  return {r.beta, ids_[r.witness]};
}

SampledDensity SampledDensity::build(const PointSet& ps, long k, std::function<double(double)> f, double eps,
                                     double phi, std::uint64_t seed, double C, double zeta2, int audit_queries) {
  const auto real = ps.real_points();
  const long n = static_cast<long>(real.size());
  if (k < 1 || k > n) throw InvalidArgument("sampled density: k out of range");
  if (!f) throw InvalidArgument("sampled density: no function");
  if (zeta2 > 0) {
    std::mt19937_64 rng(seed ^ 0x5eedULL);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::VectorXd> qs;
    for (int i = 0; i < audit_queries; ++i) {
      Eigen::VectorXd q(ps.dim());
      for (int j = 0; j < q.size(); ++j) q(j) = u(rng);
      qs.push_back(q);
    }
    audit_well_behaved(real, k, f, zeta2, qs);
  }
  SampledDensity s;
  s.f_ = std::move(f);
  // ring complements: vc dimension taken as 2(d+1)
  s.m_ = relative_sample_size({double(k) / n, eps, phi, 2.0 * (ps.dim() + 1), C}, n);
  s.exact_ = s.m_ >= n;
  s.kp_ = s.exact_ ? k : std::min<long>(s.m_, std::lround(double(k) * s.m_ / n));
  if (s.kp_ < 1) throw InvalidArgument("sampled density: parameters too coarse (k' = 0)");
  const auto ids = draw(real, s.m_, s.exact_, seed);
  s.sample_.resize(ps.dim(), ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) s.sample_.col(i) = real.point(ids[i]);
  return s;
}

double SampledDensity::query(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (q.size() != sample_.rows()) throw InvalidArgument("sampled density: query dimension mismatch");
  auto d = distances_to(sample_, q);
  std::nth_element(d.begin(), d.begin() + (kp_ - 1), d.end());
  double s = 0;
  for (long i = 0; i < kp_; ++i) s += f_(d[i]);
  return s / kp_;
}

}  // namespace prox
