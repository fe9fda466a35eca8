#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "prox/oracle.hpp"
#include "support.hpp"

using namespace prox;
namespace oc = prox::oracle;

namespace {

PointSet line(std::initializer_list<double> xs, std::initializer_list<double> ws = {}) {
  Eigen::MatrixXd m(1, xs.size());
  int j = 0;
  for (double x : xs) m(0, j++) = x;
  Eigen::VectorXd w;
  if (ws.size()) {
    w.resize(ws.size());
    j = 0;
    for (double x : ws) w(j++) = x;
  }
  return PointSet(m, w);
}

Eigen::VectorXd at(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("hand-sized knn distances") {
  auto ps = line({0.5, 0.625, 0.875});
  CHECK(oc::exact_knn_distance(ps, at(0.5), 1) == 0.0);
  CHECK(oc::exact_knn_distance(ps, at(0.5), 2) == 0.125);
  CHECK(oc::exact_knn_distance(ps, at(0.5), 3) == 0.375);
  CHECK(oc::exact_knn_distance(ps, at(0.75), 2) == 0.125);
  CHECK_THROWS_AS(oc::exact_knn_distance(ps, at(0.5), 4), InvalidArgument);
  CHECK_THROWS_AS(oc::exact_knn_distance(ps, at(0.5), 0), InvalidArgument);
  CHECK_THROWS_AS(oc::exact_knn_distance(ps, Eigen::VectorXd::Zero(2), 1), InvalidArgument);
}

TEST_CASE("synthetic points are invisible") {
  std::mt19937_64 rng(1);
  auto ps = pad_to_multiple(normalize(testing_support::uniform_points(2, 7, rng)), 4);
  REQUIRE(ps.size() == 8);
  CHECK(oc::sorted_distances(ps, Eigen::Vector2d(0.5, 0.5)).size() == 7);
  CHECK_THROWS_AS(oc::exact_knn_distance(ps, Eigen::Vector2d(0.5, 0.5), 8), InvalidArgument);
}

TEST_CASE("sort and select agree") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 3, n = 1 + t % 40;
    PointSet ps(testing_support::uniform_points(d, n, rng));
    auto q = testing_support::random_query(d, rng);
    const long k = 1 + t % n;
    CHECK(oc::exact_knn_distance(ps, q, k) == doctest::Approx(oc::exact_knn_distance_select(ps, q, k)).epsilon(1e-15));
    auto s = oc::sorted_distances(ps, q);
    CHECK(std::is_sorted(s.begin(), s.end()));
  }
}

TEST_CASE("weighted distance") {
  auto ps = line({0.5, 0.625, 0.875}, {2, 1, 5});
  CHECK(oc::exact_weighted_distance(ps, at(0.5), 2) == 0.0);
  CHECK(oc::exact_weighted_distance(ps, at(0.5), 2.5) == 0.125);
  CHECK(oc::exact_weighted_distance(ps, at(0.5), 3) == 0.125);
  CHECK(oc::exact_weighted_distance(ps, at(0.5), 3.01) == 0.375);
  CHECK(oc::exact_weighted_distance(ps, at(0.875), 5) == 0.0);
  CHECK_THROWS_AS(oc::exact_weighted_distance(ps, at(0.5), 8.5), InvalidArgument);
  CHECK_THROWS_AS(oc::exact_weighted_distance(ps, at(0.5), 0), InvalidArgument);

  // unit weights reduce to the k-th distance
  std::mt19937_64 rng(3);
  PointSet u(testing_support::uniform_points(2, 30, rng));
  for (long k = 1; k <= 30; ++k) {
    auto q = testing_support::random_query(2, rng);
    CHECK(oc::exact_weighted_distance(u, q, double(k)) == oc::exact_knn_distance(u, q, k));
  }
}

TEST_CASE("density sums") {
  auto ps = line({0.5, 0.625, 0.875, 1.0});
  auto id = [](double x) { return x; };
  auto v = oc::exact_density(ps, at(0.5), 3, id, 1.0);
  CHECK(v.D == 0.5);
  CHECK(v.F == doctest::Approx(0.5 / 3));
  CHECK(v.aD == 0.5);  // i0 = 1
  // k = 16, eps = 1 -> i0 = 2: the nearest distance is dropped
  Eigen::MatrixXd m(1, 16);
  for (int i = 0; i < 16; ++i) m(0, i) = 0.5 + i / 64.0;
  auto w = oc::exact_density(PointSet(m), at(0.5), 16, id, 1.0);
  CHECK(w.D == doctest::Approx(120.0 / 64));
  CHECK(w.aD == w.D);  // d_1 = 0
  auto w2 = oc::exact_density(PointSet(m), at(0.49), 16, id, 1.0);
  CHECK(w2.D - w2.aD == doctest::Approx(0.01));
  CHECK(w2.d.size() == 16);
}

TEST_CASE("centered ball radii") {
  auto ps = line({0.0, 0.1, 0.5, 0.55, 0.6, 1.0}, {1, 1, 1, 1, 1, 4});
  std::vector<Eigen::Index> all{0, 1, 2, 3, 4, 5};
  CHECK(oc::centered_kball_radius(ps, all, 1) == 0.0);
  CHECK(oc::centered_kball_radius(ps, all, 2) == doctest::Approx(0.05));
  CHECK(oc::centered_kball_radius(ps, all, 3) == doctest::Approx(0.05));
  CHECK(oc::centered_kball_radius(ps, {0, 1, 5}, 2) == doctest::Approx(0.1));
  CHECK(oc::centered_weighted_radius(ps, all, 4) == 0.0);
  CHECK(oc::centered_weighted_radius(ps, {0, 1, 2}, 2) == doctest::Approx(0.1));
  std::vector<double> ew{1, 1, 1, 1, 1, 1};
  CHECK(oc::centered_weighted_radius(ps, all, 4, &ew) == doctest::Approx(0.4));
  CHECK_THROWS_AS(oc::centered_weighted_radius(ps, {0, 1}, 3), InvalidArgument);
}
