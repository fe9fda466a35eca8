#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "prox/core.hpp"
#include "prox/knn_query.hpp"

namespace prox {

// sizing multiplier, tuned against the relative-approximation audit on balls
inline constexpr double kSampleC = 0.9;

struct SampleSpec {
  double rho = 1;   // k / n
  double eps = 0.5;
  double phi = 0.1;  // failure probability
  double vc_dim = 3;
  double C = kSampleC;
};

// ceil(C vc/(eps^2 rho) (ln 1/rho + ln 1/phi)), capped at n
long relative_sample_size(const SampleSpec& spec, long n);

// d_nu(r, s) = |r - s| / (r + s + nu)
double dnu_distance(double r, double s, double nu);

// (n/k) f~(dist) for dist <= r, else 0, with f~ = f (k/n) / anchor so that f~(d_{(1+eps)k}) = k/n;
// anchor = f(d_{(1+eps)k}). Throws if the value leaves [0,1].
double clipped_weight(const std::function<double(double)>& f, double dist, double r, double anchor);

// f(d_{3k/2}) <= zeta2 f(d_{k/4}) at every audit query; throws InvalidFunction otherwise
void audit_well_behaved(const PointSet& ps, long k, const std::function<double(double)>& f, double zeta2,
                        const std::vector<Eigen::VectorXd>& queries);

// true unless "successes out of trials" is significantly (p < alpha) below p0
bool binomial_guard(int successes, int trials, double p0, double alpha = 0.01);

struct SampledAnswer {
  double value = 0;
  Eigen::Index witness = -1;  // index into the full point set
};

class SampledKnn {
 public:
  SampledKnn() = default;
  static SampledKnn build(const PointSet& ps, long k, double eps, double phi, std::uint64_t seed, double C = kSampleC);

  SampledAnswer query(const Eigen::Ref<const Eigen::VectorXd>& q) const { return query_rank(q, k_); }
  // any rank t >= k, rescaled to t' = round(t m / n)
  SampledAnswer query_rank(const Eigen::Ref<const Eigen::VectorXd>& q, long t) const;

  long sample_size() const { return m_; }
  long k_prime() const { return scaled(k_); }
  bool exact() const { return exact_; }

 private:
  long scaled(long t) const;
  KnnQueryStructure knn_;
  std::vector<Eigen::Index> ids_;  // sample slot -> point index
  long n_ = 0, k_ = 0, m_ = 0;
  double eps_ = 0;
  bool exact_ = false;
};

class SampledDensity {
 public:
  SampledDensity() = default;
  // zeta2 > 0 turns on the well-behaved audit over audit_queries seeded queries
  static SampledDensity build(const PointSet& ps, long k, std::function<double(double)> f, double eps, double phi,
                              std::uint64_t seed, double C = kSampleC, double zeta2 = 0, int audit_queries = 64);

  // (1/k') sum of f over the k' nearest sample points
  double query(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  long sample_size() const { return m_; }
  long k_prime() const { return kp_; }
  bool exact() const { return exact_; }

 private:
  Eigen::MatrixXd sample_;
  std::function<double(double)> f_;
  long m_ = 0, kp_ = 0;
  bool exact_ = false;
};

}  // namespace prox
