#include "prox/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "prox/avd.hpp"
#include "prox/cquadtree.hpp"
#include "prox/density.hpp"
#include "prox/errors.hpp"
#include "prox/knn_query.hpp"
#include "prox/oracle.hpp"
#include "prox/quorum.hpp"
#include "prox/sampling.hpp"

namespace prox::acceptance {

namespace {

namespace oc = prox::oracle;
using Rng = std::mt19937_64;

// relative guard for floating point comparisons against the oracle
constexpr double kGuard = 4 * std::numeric_limits<double>::epsilon();

Eigen::MatrixXd uniform(int d, int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = u(rng);
  return m;
}

Eigen::MatrixXd two_gaussians(int d, int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 0.05);
  Eigen::MatrixXd m(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = (j % 2 ? 0.75 : 0.25) + g(rng);
  return m;
}

// half near the data box [1/2, 1/2 + 1/n]^d, half anywhere in the unit cube
Eigen::VectorXd query(int d, long n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd q(d);
  const bool near = u(rng) < 0.5;
  const double w = 1.0 / n;
  for (int i = 0; i < d; ++i) q(i) = std::clamp(near ? 0.5 - w + 3 * w * u(rng) : u(rng), 0.0, 1.0);
  return q;
}

bool in_band(double x, double lo, double hi) { return x >= lo * (1 - kGuard) && x <= hi * (1 + kGuard); }

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(4) << x;
  return s.str();
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

Result const_band() {
  Result r;
  Timer t;
  Rng rng(101);
  long bad = 0;
  double lo = HUGE_VAL, hi = 0;
  for (int d : {2, 3})
    for (long k : {8L, 32L}) {
      const auto ps = normalize(uniform(d, 512, rng));
      const auto cf = ConstantFactor::build(ps, k);
      for (int i = 0; i < 1000; ++i) {
        const auto q = query(d, 512, rng);
        const double ratio = cf.query(q).value / oc::exact_knn_distance(ps, q, k);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        bad += !in_band(ratio, 1.0, 10 * std::sqrt(2.0));
      }
    }
  r.seconds = t.seconds();
  r.pass = bad == 0 && r.seconds < 30;
  r.detail = "violations=" + std::to_string(bad) + " ratio in [" + fmt(lo) + ", " + fmt(hi) + "] (band [1, 14.14], < 30 s)";
  return r;
}

Result kavd_band() {
  Result r;
  Timer t;
  Rng rng(202);
  long vbad = 0, wbad = 0, cells = 0, unc = 0;
  for (int shape = 0; shape < 2; ++shape) {
    const auto ps = normalize(shape == 0 ? uniform(2, 1024, rng) : two_gaussians(2, 1024, rng));
    for (long k : {16L, 64L})
      for (double eps : {0.5, 0.25, 0.1}) {
        const auto sk = KavdSketch::build(ps, k, eps);
        cells += static_cast<long>(sk.cell_count());
        unc += static_cast<long>(sk.stats().uncertified);
        for (int i = 0; i < 2000; ++i) {
          const auto q = query(2, 1024, rng);
          const double dk = oc::exact_knn_distance(ps, q, k);
          const auto a = sk.query(q);
          vbad += !(a.value >= dk && a.value <= (1 + eps) * dk * (1 + kGuard));
          wbad += !in_band((ps.point(a.witness) - q).norm(), (1 - eps) * dk, (1 + eps) * dk);
        }
      }
  }
  r.seconds = t.seconds();
  r.pass = vbad == 0 && wbad == 0 && r.seconds < 300;
  r.detail = "value violations=" + std::to_string(vbad) + " witness violations=" + std::to_string(wbad) +
             " over 24000 queries, cells=" + std::to_string(cells) + " uncertified=" + std::to_string(unc) +
             " (< 300 s)";
  return r;
}

Result kavd_space() {
  Result r;
  Timer t;
  Rng rng(303);
  const auto ps = normalize(uniform(2, 4096, rng));
  std::vector<double> c;
  for (long k : {8L, 32L, 128L}) c.push_back(double(KavdSketch::build(ps, k, 0.25).cell_count()));
  r.seconds = t.seconds();
  const double ratio = c[0] / c[2];
  r.pass = c[0] > c[1] && c[1] > c[2] && ratio >= 4.0;
  r.detail = "cells k=8:" + fmt(c[0]) + " k=32:" + fmt(c[1]) + " k=128:" + fmt(c[2]) + " ratio(8/128)=" +
             fmt(ratio) + " (strictly decreasing, ratio >= 4)";
  return r;
}

Result knn_query_suite() {
  Result r;
  Timer t;
  Rng rng(404);
  long bad = 0;
  double cfit = 0, cin = 0;
  for (int d : {2, 3}) {
    const auto ps = normalize(uniform(d, 500, rng));
    const auto s = KnnQueryStructure::build(ps, 7);
    std::uniform_int_distribution<long> kd(1, 500);
    std::uniform_real_distribution<double> ed(0.05, 1.0);
    for (int i = 0; i < 500; ++i) {
      const auto q = query(d, 500, rng);
      const long k = kd(rng);
      const double eps = ed(rng);
      KnnTrace tr;
      KnnOptions opt;
      opt.trace = &tr;
      const auto a = s.knn_distance(q, k, eps, opt);
      const double dk = oc::exact_knn_distance(ps, q, k);
      bad += !in_band(a.beta, dk, (1 + eps) * dk);
      bad += !in_band((ps.point(a.witness) - q).norm(), (1 - eps) * dk, (1 + eps) * dk);
      // live = nodes kept after pruning; the entering set also holds fresh children (up to 2^d each)
      std::size_t f = 0, g = 0;
      for (auto x : tr.live) f = std::max(f, x);
      for (auto x : tr.frontier) g = std::max(g, x);
      const double scale = std::log2(500.0) + std::pow(eps, 1 - d);
      cfit = std::max(cfit, double(f) / scale);
      cin = std::max(cin, double(g) / scale);
    }
  }
  r.seconds = t.seconds();
  r.pass = bad == 0 && cfit <= 16;
  r.detail = "violations=" + std::to_string(bad) + " over 1000 triples, fitted C=" + fmt(cfit) + " (C <= 16; log2 n + eps^(1-d)), entering-set C=" + fmt(cin);
  return r;
}

Result rough() {
  Result r;
  Timer t;
  long below = 0, within = 0, total = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    Rng rng(500 + seed);
    const auto ps = normalize(uniform(2, 500, rng));
    const auto s = KnnQueryStructure::build(ps, seed, 3.0);
    const double n3 = std::pow(500.0, 3);
    std::uniform_int_distribution<long> kd(1, 500);
    for (int i = 0; i < 500; ++i) {
      const auto q = query(2, 500, rng);
      const long k = kd(rng);
      const double R = s.rough_knn_distance(q, k), dk = oc::exact_knn_distance(ps, q, k);
      below += R < dk;
      within += R <= n3 * dk;
      ++total;
    }
  }
  r.seconds = t.seconds();
  const double frac = double(within) / total;
  r.pass = below == 0 && frac >= 0.99;
  r.detail = "R < d_k in " + std::to_string(below) + " cases, fraction R <= n^3 d_k = " + fmt(frac) + " (>= 0.99)";
  return r;
}

// shared by density and tail-drop so both see the same instances
struct DensityCase {
  std::string tag;
  double alpha;  // 0: literal 4c
};
const std::vector<DensityCase>& density_cases() {
  // f=x^2 runs at the tightened alpha = 4c(1-eps)/3, see README
  static const std::vector<DensityCase> c{{"l1", 0}, {"l2sq", 4 * (2 / std::log(2.0)) * 0.75 / 3}};
  return c;
}

Result density() {
  Result r;
  Timer t;
  const long n = 256, k = 16;
  const double eps = 0.25;
  long bad = 0;
  double worst = 0;
  std::size_t core = 0;
  std::ostringstream cells;
  for (std::size_t ci = 0; ci < density_cases().size(); ++ci) {
    const auto& dc = density_cases()[ci];
    Rng rng(600 + ci);
    const auto ps = normalize(uniform(2, n, rng));
    const auto f = SlowGrowFunction::parse(dc.tag);
    DensityOptions opt;
    opt.alpha = dc.alpha;
    const auto ds = DensityStructure::build(ps, k, eps, f, opt);
    core = std::max(core, ds.coreset().size());
    cells << " " << dc.tag << ":alpha=" << fmt(ds.alpha()) << ",cells=" << ds.cell_count();
    for (int i = 0; i < 1000; ++i) {
      const auto q = query(2, n, rng);
      const double D = oc::exact_density(ps, q, k, f.f, eps).D;
      const double xi = ds.query(q);
      bad += !((1 - eps) * xi <= D && D <= (1 + eps) * xi);
      worst = std::max(worst, std::abs(D - xi) / xi);
    }
  }
  r.seconds = t.seconds();
  const double cap = 40 * std::log(double(k)) / eps;
  r.pass = bad == 0 && core <= cap;
  r.detail = "violations=" + std::to_string(bad) + " max |D-xi|/xi=" + fmt(worst) + " (<= 0.25), coreset size=" +
             std::to_string(core) + " (<= " + fmt(cap) + ")" + cells.str();
  return r;
}

Result tail_drop() {
  Result r;
  Timer t;
  const long n = 256, k = 16;
  const double eps = 0.25;
  long bad = 0;
  for (std::size_t ci = 0; ci < density_cases().size(); ++ci) {
    Rng rng(600 + ci);
    const auto ps = normalize(uniform(2, n, rng));
    const auto f = SlowGrowFunction::parse(density_cases()[ci].tag);
    for (int i = 0; i < 1000; ++i) {
      const auto v = oc::exact_density(ps, query(2, n, rng), k, f.f, eps);
      bad += !(v.aD <= v.D && v.D <= (1 + eps / 4) * v.aD);
    }
  }
  r.seconds = t.seconds();
  r.pass = bad == 0;
  r.detail = "violations of aD <= D <= (1+eps/4) aD: " + std::to_string(bad) + " over 2000 instances";
  return r;
}

Result coreset() {
  Result r;
  Timer t;
  Rng rng(707);
  long bad = 0;
  std::uniform_int_distribution<long> kd(1, 300);
  std::uniform_real_distribution<double> ed(0.05, 1.0), pd(0.5, 3.0);
  for (int i = 0; i < 500; ++i) {
    const auto ps = normalize(i % 2 ? uniform(2, 300, rng) : two_gaussians(2, 300, rng));
    const long k = kd(rng);
    const double eps = ed(rng), p = pd(rng);
    const auto d = oc::sorted_distances(ps, query(2, 300, rng));
    const auto ic = coreset_indices(k, eps);
    double aD = 0;
    for (long j = ic.first(); j <= k; ++j) aD += std::pow(d[j - 1], p);
    std::vector<double> g;
    for (long j : ic.indices) g.push_back(std::pow(d[j - 1], p));
    const double est = coreset_estimate(ic, g);
    bad += !in_band(aD, (1 - eps / 4) * est, (1 + eps / 4) * est);
  }
  const auto ic = coreset_indices(100, 0.2);
  std::vector<double> lin;
  for (long j : ic.indices) lin.push_back(double(j));
  const double est = coreset_estimate(ic, lin);
  r.seconds = t.seconds();
  r.pass = bad == 0 && est >= 0.95 * 5147 && est <= 1.05 * 5147;
  r.detail = "band violations=" + std::to_string(bad) + " over 500 sequences, sum_{3..100} i estimate=" + fmt(est) +
             " (5147 +-5%)";
  return r;
}

std::vector<CanonicalCube> random_cubes(int d, int m, Rng& rng) {
  std::uniform_int_distribution<int> lv(-10, -1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<CanonicalCube> out;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd p(d);
    for (int j = 0; j < d; ++j) p(j) = u(rng);
    out.push_back(cube_containing(p, lv(rng)));
  }
  return out;
}

Result locate() {
  Result r;
  Timer t;
  Rng rng(909);
  long bad = 0, trials = 0, color_bad = 0, color_checks = 0;
  std::uniform_int_distribution<int> nt(1, 8), nc(1, 150), dd(1, 3);
  for (int set = 0; set < 100; ++set) {
    const int d = dd(rng), I = nt(rng);
    std::vector<CompressedQuadtree> trees;
    for (int i = 0; i < I; ++i) trees.push_back(CompressedQuadtree::from_cubes(d, random_cubes(d, nc(rng), rng)));
    std::vector<const CompressedQuadtree*> ptrs;
    for (auto& tr : trees) ptrs.push_back(&tr);
    const SimultaneousLocator loc(ptrs);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd q(d);
      for (int j = 0; j < d; ++j) q(j) = u(rng);
      const auto all = loc.locate_all(q);
      for (int j = 0; j < I; ++j) bad += all[j] != trees[j].locate(q);
      ++trials;
    }
    // color index against a walk up the root path
    const auto& tr = trees[0];
    std::vector<std::vector<std::int32_t>> colors(tr.size());
    std::uniform_int_distribution<int> pick(0, I - 1);
    for (auto& cs : colors)
      if (rng() % 3 == 0) cs.push_back(pick(rng));
    const auto idx = ColorSnapshotIndex::build(tr, colors, I);
    for (std::size_t v = 0; v < tr.size(); ++v) {
      std::vector<std::int32_t> want(I, -1);
      for (int x : tr.root_path(static_cast<int>(v)))
        for (int c : colors[x]) want[c] = x;
      color_bad += idx.lowest_colored_ancestors(static_cast<int>(v)) != want;
      ++color_checks;
    }
  }
  r.seconds = t.seconds();
  r.pass = bad == 0 && color_bad == 0;
  r.detail = "locate mismatches=" + std::to_string(bad) + " over " + std::to_string(trials) +
             " trials, color index mismatches=" + std::to_string(color_bad) + " over " +
             std::to_string(color_checks) + " nodes";
  return r;
}

Result quorum() {
  Result r;
  Timer t;
  Rng rng(1010);
  long bad = 0, rounds = 0;
  std::uniform_int_distribution<int> nd(20, 2000), md(2, 40), dd(1, 3);
  for (int inst = 0; inst < 50; ++inst) {
    const int d = dd(rng), m = md(rng);
    const long k = std::max(1, nd(rng) / m);
    const auto ps = normalize(inst % 2 ? uniform(d, int(k * m), rng) : two_gaussians(d, int(k * m), rng));
    const auto qc = quorum_cluster(ps, k);
    std::vector<char> gone(ps.size(), 0);
    for (const auto& b : qc.balls) {
      std::vector<Eigen::Index> rest;
      for (Eigen::Index j = 0; j < ps.size(); ++j)
        if (!gone[j]) rest.push_back(j);
      const double rho = oc::centered_kball_radius(ps, rest, k);
      bad += !(b.radius >= rho / 2 * (1 - kGuard) && b.radius <= 2 * rho * (1 + kGuard) + 1e-15);
      ++rounds;
      for (auto j : b.members) gone[j] = 1;
    }
  }
  r.seconds = t.seconds();
  r.pass = bad == 0;
  r.detail = "rounds outside [rho/2, 2 rho]: " + std::to_string(bad) + " of " + std::to_string(rounds) +
             " over 50 instances";
  return r;
}

Result sampling() {
  Result r;
  Timer t;
  const long n = 4000, k = 400;
  const double eps = 0.3, phi = 0.1;
  const int seeds = 50;
  Rng data(1111);
  const auto ps = normalize(uniform(2, n, data));
  auto sq = [](double x) { return x * x; };
  int knn_ok = 0, den_ok = 0, both_ok = 0;
  long m1 = 0, m2 = 0;
  const long lo = static_cast<long>(std::floor((1 - eps) * k)), hi = static_cast<long>(std::ceil((1 + eps) * k));
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto sk = SampledKnn::build(ps, k, eps, phi, seed);
    const auto sd = SampledDensity::build(ps, k, sq, eps, phi, seed);
    m1 = sk.sample_size();
    m2 = sd.sample_size();
    Rng rng(2000 + seed);
    bool a = true, b = true;
    for (int i = 0; i < 100; ++i) {
      const auto q = query(2, n, rng);
      const auto d = oc::sorted_distances(ps, q);
      const double dw = (ps.point(sk.query(q).witness) - q).norm();
      a = a && in_band(dw, (1 - eps) * d[lo - 1], (1 + eps) * d[hi - 1]);
      double F = 0;
      for (long j = 0; j < k; ++j) F += sq(d[j]);
      F /= k;
      b = b && std::abs(F - sd.query(q)) <= eps * F;
    }
    knn_ok += a;
    den_ok += b;
    both_ok += a && b;
  }
  r.seconds = t.seconds();
  r.pass = binomial_guard(both_ok, seeds, 1 - phi) && r.seconds < 600;
  r.detail = "seeds with all queries in band: knn " + std::to_string(knn_ok) + "/50, density " +
             std::to_string(den_ok) + "/50, both " + std::to_string(both_ok) +
             "/50 (>= 45 or binomial p >= 0.01), m=" + std::to_string(m1) + "/" + std::to_string(m2);
  return r;
}

Result exact_laws() {
  Result r;
  Timer t;
  Rng rng(1212);
  std::normal_distribution<double> g(0, 1);
  std::uniform_int_distribution<int> dd(1, 7);
  long norm_bad = 0, lip_bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const int D = dd(rng) + 1;
    Eigen::VectorXd u(D);
    for (int j = 0; j < D; ++j) u(j) = g(rng) * std::pow(10.0, g(rng));
    const double e = u.norm(), p = product_norm(u);
    norm_bad += !(e <= p && p <= std::sqrt(2.0) * e);
  }
  std::uniform_int_distribution<int> kd(1, 16);
  for (int i = 0; i < 100000; ++i) {
    const int d = dd(rng) % 3 + 1;
    const PointSet ps(uniform(d, 16, rng));
    const long k = kd(rng);
    const Eigen::VectorXd q = uniform(d, 1, rng), w = uniform(d, 1, rng);
    // equality is common (one neighbor on the far side), so allow rounding of the three norms
    const double a = oc::exact_knn_distance(ps, q, k), b = oc::exact_knn_distance(ps, w, k), g = (q - w).norm();
    lip_bad += std::abs(a - b) > g + kGuard * std::max({a, b, g});
  }
  r.seconds = t.seconds();
  r.pass = norm_bad == 0 && lip_bad == 0;
  r.detail = "norm sandwich violations=" + std::to_string(norm_bad) + ", Lipschitz violations=" +
             std::to_string(lip_bad) + " (10^5 each, norm exact, Lipschitz within 4 ulp)";
  return r;
}

struct Entry {
  const char* name;
  std::function<Result()> run;
};

const std::vector<Entry>& table() {
  static const std::vector<Entry> t{
      {"const-band", const_band}, {"kavd-band", kavd_band}, {"kavd-space", kavd_space},
      {"knn-query", knn_query_suite}, {"rough", rough},     {"density", density},
      {"coreset", coreset},       {"tail-drop", tail_drop}, {"locate", locate},
      {"quorum", quorum},         {"sampling", sampling},   {"exact-laws", exact_laws}};
  return t;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : table()) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

Result run_suite(const std::string& name) {
  const auto& t = table();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (name == t[i].name) {
      Result r = t[i].run();
      r.id = static_cast<int>(i) + 1;
      r.name = name;
      return r;
    }
  throw InvalidArgument("unknown acceptance suite '" + name + "'");
}

void print(std::ostream& out, const Result& r) {
  out << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << " " << std::left << std::setw(11) << r.name
      << std::right << " " << std::fixed << std::setprecision(1) << std::setw(7) << r.seconds << "s  " << r.detail
      << std::defaultfloat << "\n";
}

}  // namespace prox::acceptance
