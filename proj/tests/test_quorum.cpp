#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>

#include "prox/oracle.hpp"
#include "prox/quorum.hpp"
#include "support.hpp"

using namespace prox;
namespace oc = prox::oracle;
using testing_support::uniform_points;

namespace {

// replays the rounds and checks rho*/2 <= r <= 2 rho* against the centered-ball oracle
int certify(const PointSet& ps, const QuorumClustering& qc) {
  std::vector<char> gone(ps.size(), 0);
  int bad = 0;
  for (const auto& b : qc.balls) {
    std::vector<Eigen::Index> rest;
    for (Eigen::Index j = 0; j < ps.size(); ++j)
      if (!gone[j]) rest.push_back(j);
    bool pad = false;
    for (auto j : b.members) pad |= j == qc.pad_index;
    if (!pad) {
      const double rho = qc.weighted ? oc::centered_weighted_radius(ps, rest, qc.tau)
                                     : oc::centered_kball_radius(ps, rest, qc.k);
      const double slack = 1e-12;
      bad += !(b.radius >= rho / 2 * (1 - slack) && b.radius <= 2 * rho * (1 + slack) + 1e-15);
      bad += std::abs(b.rho - rho) > 1e-14 * (1 + rho);
    }
    for (auto j : b.members)
      if (j != qc.pad_index) gone[j] = 1;
  }
  return bad;
}

}  // namespace

TEST_CASE("n = k gives one cluster") {
  std::mt19937_64 rng(1);
  auto ps = normalize(uniform_points(2, 9, rng));
  for (auto m : {QuorumMethod::Fast, QuorumMethod::Reference}) {
    auto qc = quorum_cluster(ps, 9, m);
    REQUIRE(qc.balls.size() == 1);
    CHECK(qc.balls[0].members.size() == 9);
    CHECK(audit_clustering(ps, qc).empty());
  }
}

TEST_CASE("two tight groups") {
  const int k = 5;
  Eigen::MatrixXd m(2, 2 * k);
  for (int j = 0; j < k; ++j) {
    m.col(j) = Eigen::Vector2d(0.1 + 0.002 * j, 0.1);
    m.col(k + j) = Eigen::Vector2d(0.8 + 0.001 * j, 0.8 - 0.0015 * j);
  }
  PointSet ps(m);
  for (auto meth : {QuorumMethod::Fast, QuorumMethod::Reference}) {
    auto qc = quorum_cluster(ps, k, meth);
    REQUIRE(qc.balls.size() == 2);
    for (const auto& b : qc.balls) {
      CHECK(b.radius <= 0.02);
      std::set<bool> side;
      for (auto j : b.members) side.insert(j < k);
      CHECK(side.size() == 1);
    }
    CHECK(audit_clustering(ps, qc).empty());
  }
}

TEST_CASE("sixteen points, k = 4") {
  std::mt19937_64 rng(2);
  auto ps = normalize(uniform_points(2, 16, rng));
  auto qc = quorum_cluster(ps, 4);
  CHECK(qc.balls.size() == 4);
  CHECK(audit_clustering(ps, qc).empty());
  CHECK(certify(ps, qc) == 0);
}

TEST_CASE("per-round certification, both paths") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 24; ++t) {
    const int d = 1 + t % 3;
    const int n = 30 + 11 * t;
    const long k = 1 + t % 7;
    auto raw = t % 2 ? testing_support::two_gaussians(d, n, rng) : uniform_points(d, n, rng);
    auto ps = pad_to_multiple(normalize(raw), k);
    auto fast = quorum_cluster(ps, k);
    auto ref = quorum_cluster(ps, k, QuorumMethod::Reference);
    CAPTURE(t);
    CHECK(fast.balls.size() == std::size_t(ps.size() / k));
    CHECK(audit_clustering(ps, fast).empty());
    CHECK(audit_clustering(ps, ref).empty());
    CHECK(certify(ps, fast) == 0);
    CHECK(certify(ps, ref) == 0);
    CHECK(fast.balls[0].rho == ref.balls[0].rho);
  }
}

TEST_CASE("coincident points get distinct centers") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(2, 12, 0.5);
  PointSet ps(m);
  auto qc = quorum_cluster(ps, 3);
  REQUIRE(qc.balls.size() == 4);
  CHECK(audit_clustering(ps, qc).empty());
  int jit = 0;
  for (const auto& b : qc.balls) jit += b.jittered;
  CHECK(jit == 3);
  CHECK(qc.balls[3].radius > 0);
  CHECK(qc.balls[3].radius < 1e-14);
}

TEST_CASE("argument errors") {
  std::mt19937_64 rng(4);
  auto ps = normalize(uniform_points(2, 10, rng));
  CHECK_THROWS_AS(quorum_cluster(ps, 11), InvalidArgument);
  CHECK_THROWS_AS(quorum_cluster(ps, 0), InvalidArgument);
  CHECK_THROWS_AS(quorum_cluster(ps, 3), InvalidArgument);
  CHECK_THROWS_AS(quorum_cluster_weighted(ps, 0.0), InvalidArgument);
  CHECK_THROWS_AS(quorum_cluster_weighted(ps, 10.5), InvalidArgument);
}

TEST_CASE("weighted clustering") {
  std::mt19937_64 rng(5);
  auto raw = uniform_points(2, 40, rng);
  // unit weights reduce to counts
  auto pu = normalize(raw);
  auto a = quorum_cluster(pu, 5);
  auto b = quorum_cluster_weighted(pu, 5.0);
  CHECK(a.balls.size() == b.balls.size());
  CHECK(b.pad_index == -1);

  // one heavy point
  Eigen::MatrixXd one(2, 1);
  one << 0.5, 0.5;
  auto s = quorum_cluster_weighted(PointSet(one, Eigen::VectorXd::Constant(1, 3.0)), 3.0);
  REQUIRE(s.balls.size() == 1);
  CHECK(s.balls[0].radius == 0.0);

  std::uniform_real_distribution<double> wd(0.0, 2.0);
  for (int t = 0; t < 10; ++t) {
    const int n = 50 + 10 * t;
    Eigen::VectorXd w(n);
    double wmax = 0;
    for (int i = 0; i < n; ++i) wmax = std::max(wmax, w(i) = i % 9 == 0 ? 0.0 : wd(rng));
    auto ps = normalize(uniform_points(2, n, rng), w);
    const double tau = 1.0 + t;
    for (auto meth : {QuorumMethod::Fast, QuorumMethod::Reference}) {
      auto qc = quorum_cluster_weighted(ps, tau, meth);
      CHECK(audit_clustering(ps, qc).empty());
      CHECK(certify(ps, qc) == 0);
      for (const auto& c : qc.balls) {
        CHECK(c.weight >= tau * (1 - 1e-12));
        CHECK(c.weight < tau + wmax + 1e-12);
      }
    }
  }
}

TEST_CASE("csv dump and determinism") {
  Eigen::MatrixXd m(1, 4);
  m << 0.5, 0.5, 0.75, 1.0;
  PointSet ps(m);
  auto qc = quorum_cluster(ps, 2);
  std::ostringstream out;
  write_clustering_csv(out, qc);
  CHECK(out.str() == "round,c0,radius,members\n0,0.5,0,0;1\n1,0.75,0.25,2;3\n");
  std::mt19937_64 rng(6);
  auto p2 = normalize(uniform_points(3, 64, rng));
  std::ostringstream x, y;
  write_clustering_csv(x, quorum_cluster(p2, 8));
  write_clustering_csv(y, quorum_cluster(p2, 8));
  CHECK(x.str() == y.str());
}
