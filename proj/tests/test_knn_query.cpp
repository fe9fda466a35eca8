#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "prox/knn_query.hpp"
#include "prox/oracle.hpp"
#include "support.hpp"

using namespace prox;
namespace oc = prox::oracle;
using testing_support::mixed_query;
using testing_support::uniform_points;

namespace {

// two-sided contract; small slack for the last rounding of sqrt
bool beta_ok(double beta, double dk, double eps) {
  const double u = 4 * std::numeric_limits<double>::epsilon();
  return beta >= dk * (1 - u) && beta <= (1 + eps) * dk * (1 + u);
}
bool witness_ok(double dw, double dk, double eps) {
  const double u = 4 * std::numeric_limits<double>::epsilon();
  return dw >= (1 - eps) * dk * (1 - u) && dw <= (1 + eps) * dk * (1 + u);
}

}  // namespace

TEST_CASE("single point") {
  Eigen::MatrixXd m(2, 1);
  m << 0.5, 0.5;
  PointSet ps(m);
  auto s = KnnQueryStructure::build(ps);
  CHECK(s.tree().size() == 2);
  CHECK(s.tree().bbox_lo(1) == s.tree().bbox_hi(1));
  Eigen::Vector2d q(0.2, 0.9);
  const double d = (q - ps.point(0)).norm();
  CHECK(s.rough_knn_distance(q, 1) == doctest::Approx(d).epsilon(1e-15));
  auto r = s.knn_distance(q, 1, 0.5);
  CHECK(r.beta == doctest::Approx(d).epsilon(1e-15));
  CHECK(r.witness == 0);
  auto z = s.knn_distance(Eigen::Vector2d(0.5, 0.5), 1, 0.5);
  CHECK(z.beta == 0.0);
  CHECK(z.witness == 0);
  // weight 5, tau 5
  PointSet pw(m, Eigen::VectorXd::Constant(1, 5.0));
  auto sw = KnnQueryStructure::build(pw);
  auto rw = sw.knn_distance_weighted(q, 5.0, 0.25);
  CHECK(rw.beta == doctest::Approx(d).epsilon(1e-15));
}

TEST_CASE("argument checks") {
  std::mt19937_64 rng(1);
  auto ps = normalize(uniform_points(2, 20, rng));
  auto s = KnnQueryStructure::build(ps);
  Eigen::Vector2d q(0.3, 0.3);
  CHECK_THROWS_AS(s.knn_distance(q, 0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(s.knn_distance(q, 21, 0.5), InvalidArgument);
  CHECK_THROWS_AS(s.knn_distance(q, 1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(s.knn_distance(q, 1, 1.5), InvalidArgument);
  CHECK_THROWS_AS(s.knn_distance(Eigen::Vector2d(1.5, 0.2), 1, 0.5), DomainError);
  CHECK_THROWS_AS(s.knn_distance(Eigen::Vector3d(0.2, 0.2, 0.2), 1, 0.5), InvalidArgument);
  CHECK_THROWS_AS(s.knn_distance_weighted(q, 20.5, 0.5), InvalidArgument);
  CHECK_THROWS_AS(s.rough_knn_distance(q, 21), InvalidArgument);
  CHECK_THROWS_AS(KnnQueryStructure::build(ps, 1, 2.0), InvalidArgument);
  KnnOptions open;
  open.check_domain = false;
  auto far = s.knn_distance(Eigen::Vector2d(1.5, 0.2), 3, 0.5, open);
  CHECK(beta_ok(far.beta, oc::exact_knn_distance(ps, Eigen::Vector2d(1.5, 0.2), 3), 0.5));
}

TEST_CASE("build is deterministic and sound") {
  std::mt19937_64 rng(2);
  auto ps = normalize(uniform_points(3, 1000, rng));
  auto a = KnnQueryStructure::build(ps, 42);
  auto b = KnnQueryStructure::build(ps, 42);
  CHECK(a.tree().audit().empty());
  std::ostringstream da, db;
  a.tree().dump(da);
  b.tree().dump(db);
  CHECK(da.str() == db.str());
  CHECK(a.shift() == b.shift());
  CHECK((a.shift().array() >= 0).all());
  CHECK((a.shift().array() <= 0.5).all());
  auto c = KnnQueryStructure::build(ps, 43);
  CHECK(c.shift() != a.shift());
}

TEST_CASE("synthetic points are excluded") {
  std::mt19937_64 rng(3);
  auto ps = pad_to_multiple(normalize(uniform_points(2, 13, rng)), 8);
  REQUIRE(ps.size() == 16);
  auto s = KnnQueryStructure::build(ps);
  CHECK(s.size() == 13);
  for (int t = 0; t < 100; ++t) {
    auto q = testing_support::random_query(2, rng);
    auto r = s.knn_distance(q, 13, 0.2);
    CHECK_FALSE(ps.synthetic(r.witness));
    CHECK(beta_ok(r.beta, oc::exact_knn_distance(ps, q, 13), 0.2));
  }
}

TEST_CASE("k = n on 50 points") {
  std::mt19937_64 rng(4);
  auto ps = normalize(uniform_points(2, 50, rng));
  auto s = KnnQueryStructure::build(ps, 5);
  for (int t = 0; t < 200; ++t) {
    auto q = mixed_query(2, 50, rng);
    const double dn = oc::exact_knn_distance(ps, q, 50);
    CHECK(s.rough_knn_distance(q, 50) >= dn);
    auto r = s.knn_distance(q, 50, 0.2);
    CHECK(beta_ok(r.beta, dn, 0.2));
    CHECK(witness_ok((ps.point(r.witness) - q).norm(), dn, 0.2));
  }
}

TEST_CASE("two-sided contract sweep, n=500 d=2") {
  std::mt19937_64 rng(5);
  auto ps = normalize(uniform_points(2, 500, rng));
  auto s = KnnQueryStructure::build(ps, 9);
  std::uniform_int_distribution<long> kd(1, 500);
  for (double eps : {0.5, 0.2, 0.05}) {
    int bad = 0;
    for (int t = 0; t < 1000; ++t) {
      auto q = mixed_query(2, 500, rng);
      const long k = kd(rng);
      const double dk = oc::exact_knn_distance(ps, q, k);
      auto r = s.knn_distance(q, k, eps);
      bad += !beta_ok(r.beta, dk, eps) || !witness_ok((ps.point(r.witness) - q).norm(), dk, eps);
    }
    CAPTURE(eps);
    CHECK(bad == 0);
  }
}

TEST_CASE("loop invariant, pruning and frontier size") {
  std::mt19937_64 rng(6);
  for (int d = 1; d <= 3; ++d) {
    const int n = 400;
    auto raw = d == 2 ? testing_support::two_gaussians(d, n, rng) : uniform_points(d, n, rng);
    auto ps = normalize(raw);
    auto s = KnnQueryStructure::build(ps, 11);
    std::uniform_int_distribution<long> kd(1, n);
    for (int t = 0; t < 300; ++t) {
      auto q = mixed_query(d, n, rng);
      const long k = kd(rng);
      const double eps = t % 3 == 0 ? 0.05 : 0.3;
      const double dk = oc::exact_knn_distance(ps, q, k);
      KnnTrace tr;
      KnnOptions opt;
      opt.trace = &tr;
      auto r = s.knn_distance(q, k, eps, opt);
      CHECK(tr.rough >= dk);
      for (std::size_t i = 0; i < tr.lo.size(); ++i) {
        CHECK(tr.lo[i] <= dk);
        CHECK(tr.hi[i] >= dk);
      }
      const double cap = 16 * (std::log2(double(n)) + std::pow(eps, 1.0 - d));
      CHECK(*std::max_element(tr.frontier.begin(), tr.frontier.end()) <= cap);
      KnnOptions np;
      np.prune = false;
      CHECK(s.knn_distance(q, k, eps, np).beta == r.beta);
    }
  }
}

TEST_CASE("rough distance bracket") {
  long ok = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    auto ps = normalize(uniform_points(2, 200, rng));
    auto s = KnnQueryStructure::build(ps, seed, 3.0);
    std::uniform_int_distribution<long> kd(1, 200);
    for (int t = 0; t < 200; ++t) {
      auto q = mixed_query(2, 200, rng);
      const long k = kd(rng);
      const double dk = oc::exact_knn_distance(ps, q, k);
      const double R = s.rough_knn_distance(q, k);
      CHECK(R >= dk);
      ok += R <= std::pow(200.0, 3) * dk;
      ++total;
    }
  }
  CHECK(double(ok) / total >= 0.99);
}

TEST_CASE("weighted queries") {
  std::mt19937_64 rng(7);
  const int n = 300;
  auto raw = uniform_points(2, n, rng);
  std::uniform_real_distribution<double> wd(0.1, 3.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = i % 7 == 0 ? 0.0 : wd(rng);
  auto ps = normalize(raw, w);
  auto s = KnnQueryStructure::build(ps, 3);
  std::uniform_real_distribution<double> td(1e-3, ps.total_weight());
  for (double eps : {0.5, 0.1}) {
    int bad = 0;
    for (int t = 0; t < 500; ++t) {
      auto q = mixed_query(2, n, rng);
      const double tau = td(rng);
      const double dt = oc::exact_weighted_distance(ps, q, tau);
      auto r = s.knn_distance_weighted(q, tau, eps);
      bad += !beta_ok(r.beta, dt, eps) || !witness_ok((ps.point(r.witness) - q).norm(), dt, eps);
      CHECK(s.rough_weighted_distance(q, tau) >= dt);
    }
    CHECK(bad == 0);
  }
  // unit weights: tau = k matches the count query's contract
  auto pu = normalize(raw);
  auto su = KnnQueryStructure::build(pu, 3);
  for (int t = 0; t < 200; ++t) {
    auto q = mixed_query(2, n, rng);
    const long k = 1 + t;
    const double dk = oc::exact_knn_distance(pu, q, k);
    CHECK(beta_ok(su.knn_distance_weighted(q, double(k), 0.2).beta, dk, 0.2));
  }
}

TEST_CASE("coincident points") {
  Eigen::MatrixXd m(2, 6);
  m << 0.5, 0.5, 0.5, 0.6, 0.6, 0.9,
       0.5, 0.5, 0.5, 0.6, 0.6, 0.9;
  PointSet ps(m);
  auto s = KnnQueryStructure::build(ps, 2);
  Eigen::Vector2d q(0.5, 0.5);
  for (long k = 1; k <= 3; ++k) CHECK(s.knn_distance(q, k, 0.1).beta == 0.0);
  auto r = s.knn_distance(q, 4, 0.1);
  CHECK(beta_ok(r.beta, std::sqrt(0.02), 0.1));
  CHECK((r.witness == 3 || r.witness == 4));
}
