#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "prox/avd.hpp"
#include "prox/cquadtree.hpp"

namespace prox {

// Monotone f with (1-eps) f(x) <= f((1-eps/c) x) and f((1+eps/c) x) <= (1+eps) f(x).
struct SlowGrowFunction {
  std::string tag;
  double c = 1;  // growth constant
  std::function<double(double)> f;

  double operator()(double x) const { return f(x); }

  static SlowGrowFunction power(double p);
  static SlowGrowFunction exponential();
  static SlowGrowFunction constant();
  // l1 | l2sq | pow:<p> | exp | const
  static SlowGrowFunction parse(const std::string& tag);

  // 64 log-spaced points in [1e-6, sqrt(d)]; throws InvalidFunction naming the first bad point
  void audit(double eps, int d) const;
};

struct IndexCoreset {
  long k = 0;
  double eps = 0;
  double ratio = 0;  // block growth
  std::vector<long> indices;    // ascending, ends with k
  std::vector<long> weights;    // block lengths, last = 1

  long first() const { return indices.front(); }
  std::size_t size() const { return indices.size(); }
};

// blocks i_{j+1} = max(i_j + 1, ceil(i_j (1 + ratio))), starting at ceil(k eps / 8); ratio 0 means eps/16
IndexCoreset coreset_indices(long k, double eps, double ratio = 0);

// sum w_i g_i; g sampled at the coreset indices, must be non-decreasing
double coreset_estimate(const IndexCoreset& ic, const std::vector<double>& g);

// smallest alpha for which the sandwich bound still closes: 4c(1-eps)/3
double tight_alpha(double c, double eps);

struct DensityOptions {
  double alpha = 0;  // 0: 4c
  KavdOptions kavd{0.5, 1, 1.0, true, 1};
  int max_retries = 3;
  int audit_queries = 64;
  std::uint64_t seed = 1;
};

class DensityStructure {
 public:
  DensityStructure() = default;
  // ps normalized
  static DensityStructure build(const PointSet& ps, long k, double eps, const SlowGrowFunction& f,
                                const DensityOptions& opt = {});

  double query(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  // z_i per coreset index (after the running max), through the combined locator
  std::vector<double> distances(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  // same, each sketch located on its own
  std::vector<double> distances_separately(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  const IndexCoreset& coreset() const { return coreset_; }
  const KavdSketch& sketch(std::size_t i) const { return sketches_[i]; }
  const SimultaneousLocator& locator() const { return *locator_; }
  const SlowGrowFunction& function() const { return f_; }
  double eps() const { return eps_; }
  double alpha() const { return alpha_; }
  long k() const { return coreset_.k; }
  int dim() const { return sketches_.empty() ? 0 : sketches_.front().dim(); }
  std::size_t cell_count() const;
  int retries() const { return retries_; }

  static constexpr std::uint32_t kVersion = 1;
  void save(std::ostream& out) const;
  static DensityStructure load(std::istream& in);

 private:
  void make_locator();
  std::vector<double> finish(const Eigen::Ref<const Eigen::VectorXd>& q, const std::vector<std::int32_t>& nodes) const;

  IndexCoreset coreset_;
  std::vector<KavdSketch> sketches_;
  std::shared_ptr<SimultaneousLocator> locator_;
  SlowGrowFunction f_;
  double eps_ = 0, alpha_ = 0;
  int retries_ = 0;
};

}  // namespace prox
