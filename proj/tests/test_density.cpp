#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "prox/density.hpp"
#include "prox/oracle.hpp"
#include "support.hpp"

using namespace prox;
namespace oc = prox::oracle;
using testing_support::mixed_query;
using testing_support::uniform_points;

TEST_CASE("function tags and growth constants") {
  CHECK(SlowGrowFunction::parse("l1").c == 1.0);
  CHECK(SlowGrowFunction::parse("l1")(0.3) == 0.3);
  CHECK(SlowGrowFunction::parse("l2sq")(0.5) == 0.25);
  CHECK(SlowGrowFunction::parse("l2sq").c == doctest::Approx(2 / std::log(2.0)));
  CHECK(SlowGrowFunction::parse("pow:0.5").c == 1.0);
  CHECK(SlowGrowFunction::parse("pow:1.5")(4.0) == doctest::Approx(8.0));
  CHECK(SlowGrowFunction::parse("pow:2").tag == "l2sq");
  CHECK_THROWS_AS(SlowGrowFunction::parse("pow:"), InvalidArgument);
  CHECK_THROWS_AS(SlowGrowFunction::parse("pow:2x"), InvalidArgument);
  CHECK_THROWS_AS(SlowGrowFunction::parse("pow:-1"), InvalidArgument);
  CHECK_THROWS_AS(SlowGrowFunction::parse("cube"), InvalidArgument);
}

TEST_CASE("slow growth audit") {
  for (const char* t : {"l1", "l2sq", "pow:1.5", "pow:0.5", "pow:3", "const"})
    for (double eps : {0.05, 0.25, 0.9}) CHECK_NOTHROW(SlowGrowFunction::parse(t).audit(eps, 2));
  CHECK_THROWS_AS(SlowGrowFunction::exponential().audit(0.1, 2), InvalidFunction);
  try {
    SlowGrowFunction::exponential().audit(0.1, 2);
  } catch (const InvalidFunction& e) {
    CHECK(std::string(e.what()).find("x=") != std::string::npos);
  }
  // exactly c = p would be too optimistic: (1 + eps/2)^2 > 1 + eps
  SlowGrowFunction naive = SlowGrowFunction::power(2);
  naive.c = 2;
  CHECK_THROWS_AS(naive.audit(0.5, 2), InvalidFunction);
}

TEST_CASE("index coreset shape") {
  auto a = coreset_indices(8, 1.0);
  CHECK(a.first() == 1);
  CHECK(a.indices == std::vector<long>{1, 2, 3, 4, 5, 6, 7, 8});
  long s = 0;
  for (long w : a.weights) s += w;
  CHECK(s == 8);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> kd(1, 100000);
  std::uniform_real_distribution<double> ed(0.01, 1.0);
  for (int t = 0; t < 200; ++t) {
    const long k = kd(rng);
    const double eps = ed(rng);
    auto ic = coreset_indices(k, eps);
    long sum = 0;
    for (long w : ic.weights) sum += w;
    const long i0 = static_cast<long>(std::ceil(k * eps / 8));
    CHECK(sum == k - i0 + 1);
    CHECK(ic.indices.back() == k);
    CHECK(std::is_sorted(ic.indices.begin(), ic.indices.end()));
  }
  auto big = coreset_indices(1000000, 0.1);
  CHECK(double(big.size()) <= 40 * std::log(1e6) / 0.1);
}

TEST_CASE("coreset estimate") {
  auto ic = coreset_indices(100, 0.2);
  std::vector<double> ones(ic.size(), 1.0);
  CHECK(coreset_estimate(ic, ones) == 98.0);
  std::vector<double> lin;
  for (long i : ic.indices) lin.push_back(double(i));
  const double est = coreset_estimate(ic, lin);
  CHECK(est >= 0.95 * 5147);
  CHECK(est <= 1.05 * 5147);
  std::vector<double> down(ic.size(), 1.0);
  down[1] = 0.5;
  CHECK_THROWS_AS(coreset_estimate(ic, down), ContractViolation);
  CHECK_THROWS_AS(coreset_estimate(ic, {1.0}), InvalidArgument);
}

TEST_CASE("coreset band on distance sequences") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> kd(1, 200);
  const auto f2 = SlowGrowFunction::power(2);
  int bad = 0;
  for (int t = 0; t < 500; ++t) {
    const double eps = t % 2 ? 0.25 : 0.1;
    auto ps = normalize(uniform_points(2, 200, rng));
    const long k = kd(rng);
    const Eigen::VectorXd q = mixed_query(2, 200, rng);
    const auto d = oc::sorted_distances(ps, q);
    auto ic = coreset_indices(k, eps);
    double aD = 0;
    for (long i = ic.first(); i <= k; ++i) aD += f2(d[i - 1]);
    std::vector<double> g;
    for (long i : ic.indices) g.push_back(f2(d[i - 1]));
    const double est = coreset_estimate(ic, g);
    bad += !((1 - eps / 4) * est <= aD * (1 + 1e-12) && aD <= (1 + eps / 4) * est * (1 + 1e-12));
  }
  CHECK(bad == 0);
}

TEST_CASE("density structure") {
  std::mt19937_64 rng(7);
  auto ps = normalize(uniform_points(2, 64, rng));
  const double eps = 0.25;
  const long k = 4;
  for (const char* tag : {"l1", "l2sq"}) {
    const auto f = SlowGrowFunction::parse(tag);
    DensityOptions opt;
    opt.alpha = 4 * f.c * (1 - eps) / 3;
    auto ds = DensityStructure::build(ps, k, eps, f, opt);
    CHECK(ds.coreset().size() == ds.locator().tree_count());
    int bad = 0, loc = 0, tail = 0;
    for (int i = 0; i < 400; ++i) {
      const Eigen::VectorXd q = mixed_query(2, 64, rng);
      const auto ex = oc::exact_density(ps, q, k, f.f, eps);
      const double xi = ds.query(q);
      bad += !((1 - eps) * xi <= ex.D && ex.D <= (1 + eps) * xi);
      loc += ds.distances(q) != ds.distances_separately(q);
      tail += !(ex.aD <= ex.D && ex.D <= (1 + eps / 4) * ex.aD);
    }
    CHECK(bad == 0);
    CHECK(loc == 0);
    CHECK(tail == 0);
  }
}

TEST_CASE("density: k = 1 tracks the nearest distance") {
  std::mt19937_64 rng(9);
  auto ps = normalize(uniform_points(2, 32, rng));
  auto ds = DensityStructure::build(ps, 1, 0.25, SlowGrowFunction::power(1));
  CHECK(ds.coreset().size() == 1);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd q = mixed_query(2, 32, rng);
    const double d1 = oc::exact_knn_distance(ps, q, 1);
    const double xi = ds.query(q);
    CHECK(xi >= d1);
    CHECK(xi <= 1.25 * d1 * (1 + 1e-12));
  }
}

TEST_CASE("density: errors and round trip") {
  std::mt19937_64 rng(11);
  auto ps = normalize(uniform_points(2, 24, rng));
  CHECK_THROWS_AS(DensityStructure::build(ps, 4, 0.1, SlowGrowFunction::exponential()), InvalidFunction);
  CHECK_THROWS_AS(DensityStructure::build(ps, 25, 0.25, SlowGrowFunction::power(1)), InvalidArgument);
  CHECK_THROWS_AS(DensityStructure::build(ps, 4, 0.0, SlowGrowFunction::power(1)), InvalidArgument);
  DensityOptions opt;
  opt.alpha = 1;
  CHECK_THROWS_AS(DensityStructure::build(ps, 4, 0.5, SlowGrowFunction::power(2), opt), InvalidArgument);
  opt.alpha = 2 * SlowGrowFunction::power(2).c;
  auto ds = DensityStructure::build(ps, 4, 0.5, SlowGrowFunction::power(2), opt);
  CHECK_THROWS_AS(ds.query(Eigen::VectorXd::Constant(2, -0.1)), DomainError);
  std::stringstream buf;
  ds.save(buf);
  auto back = DensityStructure::load(buf);
  CHECK(back.coreset().indices == ds.coreset().indices);
  CHECK(back.coreset().weights == ds.coreset().weights);
  CHECK(back.function().tag == "l2sq");
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd q = mixed_query(2, 24, rng);
    CHECK(back.query(q) == ds.query(q));
  }
  std::istringstream junk("KDEN");
  CHECK_THROWS_AS(DensityStructure::load(junk), IoError);
}
