#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "prox/errors.hpp"
#include "prox/oracle.hpp"
#include "prox/sampling.hpp"
#include "support.hpp"

using namespace prox;
namespace oc = prox::oracle;
using testing_support::mixed_query;
using testing_support::uniform_points;

TEST_CASE("sample size formula") {
  SampleSpec s{0.1, 0.3, 0.1, 3, 0.5};
  CHECK(relative_sample_size(s, 4000) == 768);  // ceil(0.5*3/(0.09*0.1)*ln 100)
  CHECK(relative_sample_size({0.1, 0.3, 0.1, 3}, 4000) == 1382);
  CHECK(relative_sample_size(s, 500) == 500);
  const long m = relative_sample_size(s, 0);
  s.eps /= 2;
  const long m2 = relative_sample_size(s, 0);
  CHECK(m2 <= 4 * m);
  CHECK(m2 >= 4 * m - 3);
  SampleSpec one{1.0, 0.5, 0.1, 3, 0.5};
  CHECK(relative_sample_size(one, 10) <= 10);
  CHECK_THROWS_AS(relative_sample_size({0.0, 0.5, 0.1, 3, 0.5}, 10), InvalidArgument);
  CHECK_THROWS_AS(relative_sample_size({0.5, 1.0, 0.1, 3, 0.5}, 10), InvalidArgument);
  CHECK_THROWS_AS(relative_sample_size({0.5, 0.5, 0.0, 3, 0.5}, 10), InvalidArgument);
}

// relative (rho, eps)-approximation for balls centered at data points through data points
TEST_CASE("default C gives relative approximations") {
  const int n = 2000, k = 64, trials = 200, centers = 100;
  const double eps = 0.5, rho = double(k) / n;
  const long m = relative_sample_size({rho, eps, 0.1, 3}, n);
  REQUIRE(m < n);
  std::mt19937_64 rng(17);
  int good = 0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::MatrixXd P = uniform_points(2, n, rng);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> R(m);
    for (auto& r : R) r = pick(rng);
    bool ok = true;
    for (int c = 0; c < centers && ok; ++c) {
      const Eigen::VectorXd q = P.col(pick(rng));
      std::vector<double> dp(n), ds(m);
      for (int j = 0; j < n; ++j) dp[j] = (P.col(j) - q).norm();
      for (long j = 0; j < m; ++j) ds[j] = dp[R[j]];
      std::sort(dp.begin(), dp.end());
      std::sort(ds.begin(), ds.end());
      std::size_t s = 0;
      for (int i = 0; i < n && ok; ++i) {
        if (i + 1 < n && dp[i + 1] == dp[i]) continue;
        while (s < ds.size() && ds[s] <= dp[i]) ++s;
        const double mu = double(i + 1) / n, hat = double(s) / m;
        ok = std::abs(hat - mu) <= eps * std::max(mu, rho);
      }
    }
    good += ok;
  }
  CHECK(good >= 0.99 * trials);
}

TEST_CASE("d_nu and clipped weights") {
  CHECK(dnu_distance(0.3, 0.3, 0.1) == 0.0);
  CHECK(dnu_distance(1, 0, 1) == 0.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double r = u(rng), s = u(rng), nu = u(rng) + 1e-3;
    CHECK(dnu_distance(r, s, nu) == dnu_distance(s, r, nu));
  }
  CHECK_THROWS_AS(dnu_distance(-1, 0, 1), InvalidArgument);

  auto f = [](double x) { return x * x; };
  CHECK(clipped_weight(f, 0.5, 0.4, 0.16) == 0.0);
  CHECK(clipped_weight(f, 0.4, 0.4, f(0.4)) == 1.0);

  // mean over P of h equals (k/n) * F(q) / anchor when the radius is d_k
  auto ps = normalize(uniform_points(2, 300, rng));
  const long k = 30;
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd q = mixed_query(2, 300, rng);
    const auto d = oc::sorted_distances(ps, q);
    const double r = d[k - 1], anchor = f(d[static_cast<long>(std::ceil(1.25 * k)) - 1]);
    double mean = 0;
    for (Eigen::Index j = 0; j < ps.size(); ++j) mean += clipped_weight(f, (ps.point(j) - q).norm(), r, anchor);
    mean /= ps.size();
    const double F = oc::exact_density(ps, q, k, f).D / k;
    CHECK(mean == doctest::Approx(double(k) / ps.size() * F / anchor).epsilon(1e-9));
  }
}

TEST_CASE("binomial guard") {
  CHECK(binomial_guard(45, 50, 0.9));
  CHECK(binomial_guard(42, 50, 0.9));   // P[X <= 42] is about 0.12
  CHECK(!binomial_guard(35, 50, 0.9));  // far below
}

TEST_CASE("sampled knn: exact path") {
  std::mt19937_64 rng(5);
  auto ps = normalize(uniform_points(2, 300, rng));
  auto s = SampledKnn::build(ps, 30, 0.2, 0.1, 1);
  CHECK(s.exact());
  CHECK(s.k_prime() == 30);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd q = mixed_query(2, 300, rng);
    const double dk = oc::exact_knn_distance(ps, q, 30);
    const auto a = s.query(q);
    const double dw = (ps.point(a.witness) - q).norm();
    CHECK(a.value >= dk * (1 - 1e-12));
    CHECK(a.value <= 1.2 * dk * (1 + 1e-12));
    CHECK(dw >= 0.8 * dk * (1 - 1e-12));
    CHECK(dw <= 1.2 * dk * (1 + 1e-12));
  }
}

namespace {

bool in_band(const std::vector<double>& d, long t, double eps, double dw) {
  const long n = static_cast<long>(d.size());
  const long lo = std::max(1L, static_cast<long>(std::floor((1 - eps) * t)));
  const long hi = std::min(n, static_cast<long>(std::ceil((1 + eps) * t)));
  return dw >= (1 - eps) * d[lo - 1] && dw <= (1 + eps) * d[hi - 1];
}

}  // namespace

TEST_CASE("sampled knn: sampled path, ranks k and 2k") {
  std::mt19937_64 rng(7);
  const long n = 4000, k = 400;
  const double eps = 0.3;
  auto ps = normalize(uniform_points(2, n, rng));
  int seeds_ok = 0;
  const int seeds = 10;
  for (int seed = 1; seed <= seeds; ++seed) {
    auto s = SampledKnn::build(ps, k, eps, 0.1, seed);
    CHECK(!s.exact());
    CHECK(s.k_prime() == std::lround(double(k) * s.sample_size() / n));
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd q = mixed_query(2, n, rng);
      const auto d = oc::sorted_distances(ps, q);
      ok = ok && in_band(d, k, eps, (ps.point(s.query(q).witness) - q).norm());
      ok = ok && in_band(d, 2 * k, eps, (ps.point(s.query_rank(q, 2 * k).witness) - q).norm());
    }
    seeds_ok += ok;
  }
  CHECK(seeds_ok >= 9);
}

TEST_CASE("sampled knn: too coarse") {
  std::mt19937_64 rng(9);
  auto ps = normalize(uniform_points(2, 100000, rng));
  // m is about 1.9e4, so k' rounds to 0 for k = 1
  CHECK_THROWS_AS(SampledKnn::build(ps, 1, 0.9, 0.5, 1, 0.001), InvalidArgument);
}

TEST_CASE("sampled density") {
  std::mt19937_64 rng(11);
  const long n = 4000, k = 400;
  const double eps = 0.3;
  auto ps = normalize(uniform_points(2, n, rng));
  auto one = SampledDensity::build(ps, k, [](double) { return 1.0; }, eps, 0.1, 1);
  CHECK(one.query(mixed_query(2, n, rng)) == 1.0);

  auto sq = [](double x) { return x * x; };
  int seeds_ok = 0, f1_bad = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    auto s = SampledDensity::build(ps, k, sq, eps, 0.1, seed, kSampleC, 16.0);
    CHECK(!s.exact());
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd q = mixed_query(2, n, rng);
      const double F = oc::exact_density(ps, q, k, sq).D / k;
      const double G = s.query(q);
      ok = ok && std::abs(F - G) <= eps * F;
      // root mean square: the square root halves the relative error
      if (std::abs(F - G) <= eps * F) f1_bad += std::abs(std::sqrt(F) - std::sqrt(G)) > eps * std::sqrt(F);
    }
    seeds_ok += ok;
  }
  CHECK(seeds_ok >= 9);
  CHECK(f1_bad == 0);

  // exact path reproduces F
  auto small = normalize(uniform_points(2, 200, rng));
  auto ex = SampledDensity::build(small, 20, sq, 0.3, 0.1, 1);
  CHECK(ex.exact());
  const Eigen::VectorXd q = mixed_query(2, 200, rng);
  CHECK(ex.query(q) == doctest::Approx(oc::exact_density(small, q, 20, sq).D / 20).epsilon(1e-12));
}

TEST_CASE("well-behaved audit") {
  std::mt19937_64 rng(13);
  auto ps = normalize(uniform_points(2, 500, rng));
  auto ex = [](double x) { return std::exp(1e4 * x); };
  CHECK_THROWS_AS(SampledDensity::build(ps, 40, ex, 0.3, 0.1, 1, kSampleC, 4.0), InvalidFunction);
  CHECK_NOTHROW(SampledDensity::build(ps, 40, [](double x) { return x; }, 0.3, 0.1, 1, kSampleC, 16.0));
}
