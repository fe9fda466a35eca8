// command line front end: build, query, accept, oracle, sample
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "prox/acceptance.hpp"
#include "prox/avd.hpp"
#include "prox/density.hpp"
#include "prox/errors.hpp"
#include "prox/io.hpp"
#include "prox/knn_query.hpp"
#include "prox/oracle.hpp"
#include "prox/sampling.hpp"
#include "prox/version.hpp"

using namespace prox;

namespace {

enum Exit { kOk = 0, kValidation = 2, kViolation = 3, kIo = 4 };
enum class Kind : std::uint32_t { Kavd = 0, Knnq = 1, Const = 2, Density = 3, Sample = 4 };

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Kavd: return "kavd";
    case Kind::Knnq: return "knnq";
    case Kind::Const: return "const";
    case Kind::Density: return "density";
    case Kind::Sample: return "sample";
  }
  return "?";
}

Kind parse_kind(const std::string& s) {
  for (auto k : {Kind::Kavd, Kind::Knnq, Kind::Const, Kind::Density, Kind::Sample})
    if (s == kind_name(k)) return k;
  throw InvalidArgument("unknown kind '" + s + "' (kavd, knnq, const, density, sample)");
}

// exponent of a homogeneous f; values scale by scale^p when leaving normalized space
double homogeneity(const SlowGrowFunction& f) {
  if (f.tag == "l1") return 1;
  if (f.tag == "l2sq") return 2;
  if (f.tag.rfind("pow:", 0) == 0) return std::stod(f.tag.substr(4));
  throw InvalidArgument("--f must be l1, l2sq or pow:<p>");
}

template <typename T>
void put(std::ostream& o, T v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& in) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("truncated sketch file");
  return v;
}

constexpr std::uint32_t kFileVersion = 1;

// parameters shared by every kind
struct Params {
  long k = 0;
  double tau = 0;  // > 0: weighted
  double eps = 0.25;
  double phi = 0.1;
  std::uint64_t seed = 1;
  std::string f = "l1";
  std::string alpha = "literal";  // literal (4c) | tight | number
};

// in-memory form of a sketch file
struct Sketch {
  Kind kind = Kind::Kavd;
  Params p;
  RawPoints raw;  // kept for knnq, const and sample, which rebuild deterministically
  KavdSketch kavd;
  DensityStructure density;
  // rebuilt
  PointSet ps;
  KnnQueryStructure knn;
  ConstantFactor cf;
  SampledKnn sampled;
  int dim = 0;
  Transform transform;
};

void rebuild(Sketch& s) {
  s.ps = normalize(s.raw.coords, s.raw.has_weights ? s.raw.weights : Eigen::VectorXd());
  s.dim = s.ps.dim();
  s.transform = s.ps.transform();
  switch (s.kind) {
    case Kind::Knnq: s.knn = KnnQueryStructure::build(s.ps, s.p.seed); break;
    case Kind::Const: s.cf = ConstantFactor::build(pad_to_multiple(s.ps, s.p.k), s.p.k, s.p.seed); break;
    case Kind::Sample: s.sampled = SampledKnn::build(s.ps, s.p.k, s.p.eps, s.p.phi, s.p.seed); break;
    default: break;
  }
}

void save(const Sketch& s, std::ostream& out) {
  out.write("PRXC", 4);
  put<std::uint32_t>(out, kFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.kind));
  if (s.kind == Kind::Kavd) return s.kavd.save(out);
  if (s.kind == Kind::Density) return s.density.save(out);
  put<std::int64_t>(out, s.p.k);
  put<double>(out, s.p.tau);
  put<double>(out, s.p.eps);
  put<double>(out, s.p.phi);
  put<std::uint64_t>(out, s.p.seed);
  put<std::uint8_t>(out, s.raw.has_weights);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.raw.coords.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(s.raw.coords.cols()));
  out.write(reinterpret_cast<const char*>(s.raw.coords.data()), s.raw.coords.size() * sizeof(double));
  out.write(reinterpret_cast<const char*>(s.raw.weights.data()), s.raw.weights.size() * sizeof(double));
}

Sketch load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "PRXC", 4) != 0) throw IoError(path + ": not a sketch file");
  if (get<std::uint32_t>(in) != kFileVersion) throw IoError(path + ": unsupported sketch file version");
  Sketch s;
  const auto kind = get<std::uint32_t>(in);
  if (kind > 4) throw IoError(path + ": unknown sketch kind");
  s.kind = static_cast<Kind>(kind);
  if (s.kind == Kind::Kavd) {
    s.kavd = KavdSketch::load(in);
    s.dim = s.kavd.dim();
    s.transform = s.kavd.transform();
    s.p.k = s.kavd.k();
    s.p.tau = s.kavd.weighted() ? s.kavd.tau() : 0;
    s.p.eps = s.kavd.eps();
    return s;
  }
  if (s.kind == Kind::Density) {
    s.density = DensityStructure::load(in);
    s.dim = s.density.dim();
    s.transform = s.density.sketch(0).transform();
    s.p.k = s.density.k();
    s.p.eps = s.density.eps();
    s.p.f = s.density.function().tag;
    s.p.alpha = std::to_string(s.density.alpha());
    return s;
  }
  s.p.k = get<std::int64_t>(in);
  s.p.tau = get<double>(in);
  s.p.eps = get<double>(in);
  s.p.phi = get<double>(in);
  s.p.seed = get<std::uint64_t>(in);
  s.raw.has_weights = get<std::uint8_t>(in) != 0;
  const auto d = get<std::uint32_t>(in);
  const auto n = get<std::uint64_t>(in);
  if (d < 1 || d > static_cast<std::uint32_t>(kMaxDim) || n < 1 || n > (1ULL << 32)) throw IoError(path + ": bad header");
  s.raw.coords.resize(d, static_cast<Eigen::Index>(n));
  s.raw.weights.resize(static_cast<Eigen::Index>(n));
  if (!in.read(reinterpret_cast<char*>(s.raw.coords.data()), s.raw.coords.size() * sizeof(double)) ||
      !in.read(reinterpret_cast<char*>(s.raw.weights.data()), s.raw.weights.size() * sizeof(double)))
    throw IoError(path + ": truncated sketch file");
  rebuild(s);
  return s;
}

void echo(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& kv) {
  out << "# prox " << kLibraryVersion << "\n#";
  for (const auto& [k, v] : kv) out << ' ' << k << '=' << v;
  out << '\n';
}

std::string str(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

// ---- build

struct BuildArgs {
  std::string input, out, kind = "kavd";
  Params p;
};

int cmd_build(const BuildArgs& a) {
  const Kind kind = parse_kind(a.kind);
  if (a.p.k == 0 && a.p.tau == 0) throw InvalidArgument("one of --k or --tau is required");
  if (a.p.k != 0 && a.p.tau != 0) throw InvalidArgument("--k and --tau are exclusive");
  if (a.p.tau != 0 && kind != Kind::Kavd && kind != Kind::Knnq) throw InvalidArgument("--tau only applies to kavd and knnq");
  if (!(a.p.eps > 0 && a.p.eps < 1)) throw InvalidArgument("--eps must lie in (0,1)");
  Sketch s;
  s.kind = kind;
  s.p = a.p;
  s.raw = read_points_file(a.input);
  if (s.raw.coords.cols() == 0) throw InvalidArgument(a.input + ": no points");
  const auto t0 = std::chrono::steady_clock::now();
  std::string stats;
  if (kind == Kind::Kavd || kind == Kind::Density) {
    const auto ps = normalize(s.raw.coords, s.raw.has_weights ? s.raw.weights : Eigen::VectorXd());
    if (kind == Kind::Kavd) {
      s.kavd = a.p.tau > 0 ? KavdSketch::build_weighted(ps, a.p.tau, a.p.eps)
                           : KavdSketch::build(pad_to_multiple(ps, a.p.k), a.p.k, a.p.eps);
      stats = "cells=" + std::to_string(s.kavd.cell_count()) + " clusters=" + std::to_string(s.kavd.cluster_count()) +
              " uncertified=" + std::to_string(s.kavd.stats().uncertified);
    } else {
      const auto f = SlowGrowFunction::parse(a.p.f);
      homogeneity(f);
      DensityOptions opt;
      if (a.p.alpha == "tight") opt.alpha = tight_alpha(f.c, a.p.eps);
      else if (a.p.alpha != "literal") {
        try {
          opt.alpha = std::stod(a.p.alpha);
        } catch (const std::exception&) {
          throw InvalidArgument("--alpha must be literal, tight or a number");
        }
        if (!(opt.alpha > 0)) throw InvalidArgument("--alpha must be positive");
      }
      opt.seed = a.p.seed;
      s.density = DensityStructure::build(ps, a.p.k, a.p.eps, f, opt);
      stats = "cells=" + std::to_string(s.density.cell_count()) + " coreset=" +
              std::to_string(s.density.coreset().size()) + " alpha=" + str(s.density.alpha());
    }
  } else {
    rebuild(s);
    if (kind == Kind::Knnq) stats = "nodes=" + std::to_string(s.knn.tree().size());
    if (kind == Kind::Const) stats = "clusters=" + std::to_string(s.cf.cluster_count());
    if (kind == Kind::Sample)
      stats = "sample=" + std::to_string(s.sampled.sample_size()) + " k_prime=" + std::to_string(s.sampled.k_prime());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw IoError("cannot write '" + a.out + "'");
  save(s, out);
  out.close();
  if (!out) throw IoError("write failed for '" + a.out + "'");
  std::ifstream sz(a.out, std::ios::binary | std::ios::ate);
  echo(std::cout, {{"cmd", "build"}, {"input", a.input}, {"kind", kind_name(kind)}, {"k", std::to_string(a.p.k)},
                   {"tau", str(a.p.tau)}, {"eps", str(a.p.eps)}, {"phi", str(a.p.phi)}, {"seed", std::to_string(a.p.seed)},
                   {"f", a.p.f}, {"alpha", a.p.alpha}, {"out", a.out}});
  std::cout << "points=" << s.raw.coords.cols() << " dim=" << s.raw.coords.rows() << " " << stats
            << " bytes=" << static_cast<long long>(sz.tellg()) << " seconds=" << std::setprecision(3) << secs << "\n";
  return kOk;
}

// ---- query

struct QueryArgs {
  std::string sketch, queries, input;
  bool oracle = false, clamp = false;
};

int cmd_query(const QueryArgs& a) {
  Sketch s = load(a.sketch);
  RawPoints pts;
  PointSet ref_ps;
  if (a.oracle) {
    if (a.input.empty()) throw InvalidArgument("--oracle needs --input with the original points");
    pts = read_points_file(a.input);
    if (pts.coords.rows() != s.dim) throw InvalidArgument("--input dimension does not match the sketch");
    // checks run in normalized space, where the sketch answered
    ref_ps = normalize(pts.coords, pts.has_weights ? pts.weights : Eigen::VectorXd());
  }
  std::ifstream qin(a.queries);
  if (!qin) throw IoError("cannot open '" + a.queries + "'");

  const double scale = s.transform.scale;
  double p_exp = 1;
  if (s.kind == Kind::Density) p_exp = homogeneity(s.density.function());
  const double eps = s.p.eps;

  echo(std::cout, {{"cmd", "query"}, {"sketch", a.sketch}, {"kind", kind_name(s.kind)}, {"k", std::to_string(s.p.k)},
                   {"tau", str(s.p.tau)}, {"eps", str(eps)}, {"f", s.p.f}, {"queries", a.queries},
                   {"oracle", a.oracle ? "1" : "0"}, {"clamp", a.clamp ? "1" : "0"}});
  for (int i = 0; i < s.dim; ++i) std::cout << 'q' << i << ',';
  std::cout << "value,witness_index" << (a.oracle ? ",oracle,ratio" : "") << "\n";
  std::cout << std::setprecision(17);

  long violations = 0, line_no = 0, skipped = 0;
  std::string line;
  while (std::getline(qin, line)) {
    ++line_no;
    std::istringstream ls(line);
    RawPoints one;
    try {
      one = read_points(ls);
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()).substr(std::string(e.what()).find(": ") + 2), line_no);
    }
    if (one.coords.cols() == 0) continue;
    if (one.coords.rows() != s.dim)
      throw ParseError("query has " + std::to_string(one.coords.rows()) + " coordinates, sketch expects " +
                           std::to_string(s.dim), line_no);
    const Eigen::VectorXd qr = one.coords.col(0);
    Eigen::VectorXd q = s.transform.to_normalized(qr);
    if (!in_unit_cube(q)) {
      if (a.clamp) {
        q = q.cwiseMax(0.0).cwiseMin(1.0);
      } else {
        std::cerr << "line " << line_no << ": query outside the sketch domain, skipped\n";
        for (int i = 0; i < s.dim; ++i) std::cout << qr(i) << ',';
        std::cout << "nan,-1" << (a.oracle ? ",nan,nan" : "") << "\n";
        ++skipped;
        continue;
      }
    }
    const Eigen::VectorXd& qa = q;  // the clamped query is the one answered and checked
    double value = 0;
    Eigen::Index witness = -1;
    switch (s.kind) {
      case Kind::Kavd: {
        const auto r = s.kavd.query(q);
        value = r.value;
        witness = r.witness;
        break;
      }
      case Kind::Knnq: {
        const auto r = s.p.tau > 0 ? s.knn.knn_distance_weighted(q, s.p.tau, eps) : s.knn.knn_distance(q, s.p.k, eps);
        value = r.beta;
        witness = r.witness;
        break;
      }
      case Kind::Const: {
        const auto r = s.cf.query(q);
        value = r.value;
        witness = r.witness;
        break;
      }
      case Kind::Density: value = s.density.query(q); break;
      case Kind::Sample: {
        const auto r = s.sampled.query(q);
        value = r.value;
        witness = r.witness;
        break;
      }
    }
    if (witness >= static_cast<Eigen::Index>(s.raw.coords.cols()) && s.raw.coords.cols() > 0) witness = -1;
    const double unit = s.kind == Kind::Density ? std::pow(scale, p_exp) : scale;
    for (int i = 0; i < s.dim; ++i) std::cout << qr(i) << ',';
    std::cout << value * unit << ',' << witness;
    if (a.oracle) {
      const double u = 4 * std::numeric_limits<double>::epsilon();
      double truth = 0;
      bool ok = true;
      auto wdist = [&] { return witness >= 0 && witness < ref_ps.size() ? (ref_ps.point(witness) - qa).norm() : NAN; };
      switch (s.kind) {
        case Kind::Kavd:
        case Kind::Knnq: {
          truth = s.p.tau > 0 ? oracle::exact_weighted_distance(ref_ps, qa, s.p.tau)
                              : oracle::exact_knn_distance(ref_ps, qa, s.p.k);
          const double dw = wdist();
          ok = value >= truth * (1 - u) && value <= (1 + eps) * truth * (1 + u) && dw >= (1 - eps) * truth * (1 - u) &&
               dw <= (1 + eps) * truth * (1 + u);
          break;
        }
        case Kind::Const:
          truth = oracle::exact_knn_distance(ref_ps, qa, s.p.k);
          ok = value >= truth * (1 - u) && value <= 10 * std::sqrt(2.0) * truth * (1 + u);
          break;
        case Kind::Density:
          truth = oracle::exact_density(ref_ps, qa, s.p.k, s.density.function().f, eps).D;
          ok = (1 - eps) * value <= truth * (1 + u) && truth <= (1 + eps) * value * (1 + u);
          break;
        case Kind::Sample: {
          const auto d = oracle::sorted_distances(ref_ps, qa);
          const long n = static_cast<long>(d.size());
          const long lo = std::max(1L, static_cast<long>(std::floor((1 - eps) * s.p.k)));
          const long hi = std::min(n, static_cast<long>(std::ceil((1 + eps) * s.p.k)));
          truth = d[s.p.k - 1];
          const double dw = wdist();
          ok = dw >= (1 - eps) * d[lo - 1] * (1 - u) && dw <= (1 + eps) * d[hi - 1] * (1 + u);
          break;
        }
      }
      std::cout << ',' << truth * unit << ',' << (truth > 0 ? value / truth : (value == 0 ? 1.0 : INFINITY));
      if (!ok) {
        ++violations;
        std::cerr << "line " << line_no << ": contract violation\n";
      }
    }
    std::cout << '\n';
  }
  if (skipped) std::cerr << skipped << " queries outside the domain\n";
  if (violations) {
    std::cerr << violations << " contract violations\n";
    return kViolation;
  }
  return kOk;
}

// ---- accept

int cmd_accept(const std::string& suite) {
  std::vector<std::string> names;
  if (suite == "all") names = acceptance::suite_names();
  else names.push_back(suite);
  for (const auto& n : names)
    if (std::find(acceptance::suite_names().begin(), acceptance::suite_names().end(), n) ==
        acceptance::suite_names().end())
      throw InvalidArgument("unknown suite '" + n + "'");
  echo(std::cout, {{"cmd", "accept"}, {"suite", suite}});
  int failed = 0;
  for (const auto& n : names) {
    const auto r = acceptance::run_suite(n);
    acceptance::print(std::cout, r);
    std::cout.flush();
    failed += !r.pass;
  }
  return failed ? kViolation : kOk;
}

// ---- oracle

struct OracleArgs {
  std::string input, queries, f = "l1";
  long k = 1;
  double eps = 1.0;
};

int cmd_oracle(const OracleArgs& a) {
  const auto pts = read_points_file(a.input);
  const PointSet ps(pts.coords, pts.has_weights ? pts.weights : Eigen::VectorXd());
  const auto qs = read_points_file(a.queries);
  if (qs.coords.cols() > 0 && qs.coords.rows() != ps.dim()) throw InvalidArgument("query dimension does not match the input");
  if (a.k < 1 || a.k > ps.size()) throw InvalidArgument("--k out of range");
  const auto f = SlowGrowFunction::parse(a.f);
  echo(std::cout, {{"cmd", "oracle"}, {"input", a.input}, {"queries", a.queries}, {"k", std::to_string(a.k)},
                   {"f", f.tag}, {"eps", str(a.eps)}});
  for (int i = 0; i < ps.dim(); ++i) std::cout << 'q' << i << ',';
  std::cout << "d_k,D,aD,F,micros\n" << std::setprecision(17);
  for (Eigen::Index j = 0; j < qs.coords.cols(); ++j) {
    const Eigen::VectorXd q = qs.coords.col(j);
    const auto t0 = std::chrono::steady_clock::now();
    const double dk = oracle::exact_knn_distance(ps, q, a.k);
    const auto v = oracle::exact_density(ps, q, a.k, f.f, a.eps);
    const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    for (int i = 0; i < ps.dim(); ++i) std::cout << q(i) << ',';
    std::cout << dk << ',' << v.D << ',' << v.aD << ',' << v.D / a.k << ',' << std::lround(us) << '\n';
  }
  return kOk;
}

// ---- sample

struct SampleArgs {
  std::string input, f = "l2sq";
  long k = 0;
  double eps = 0.3, phi = 0.1;
  std::uint64_t seed = 1;
  int trials = 10, queries = 100;
};

int cmd_sample(const SampleArgs& a) {
  const auto pts = read_points_file(a.input);
  const auto ps = normalize(pts.coords);
  const long n = static_cast<long>(ps.size());
  if (a.k < 1 || a.k > n) throw InvalidArgument("--k out of range");
  const auto f = SlowGrowFunction::parse(a.f);
  echo(std::cout, {{"cmd", "sample"}, {"input", a.input}, {"k", std::to_string(a.k)}, {"eps", str(a.eps)},
                   {"phi", str(a.phi)}, {"seed", std::to_string(a.seed)}, {"trials", std::to_string(a.trials)},
                   {"queries", std::to_string(a.queries)}, {"f", f.tag}});
  std::cout << "trial,seed,m_knn,k_prime,knn_failures,knn_worst_band,m_density,density_failures,density_worst_rel\n";
  const long lo = std::max(1L, static_cast<long>(std::floor((1 - a.eps) * a.k)));
  const long hi = std::min(n, static_cast<long>(std::ceil((1 + a.eps) * a.k)));
  int good = 0;
  for (int t = 0; t < a.trials; ++t) {
    const std::uint64_t seed = a.seed + t;
    const auto sk = SampledKnn::build(ps, a.k, a.eps, a.phi, seed);
    const auto sd = SampledDensity::build(ps, a.k, f.f, a.eps, a.phi, seed);
    std::mt19937_64 rng(seed * 7919);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long kf = 0, df = 0;
    double kw = 0, dw = 0;
    for (int i = 0; i < a.queries; ++i) {
      Eigen::VectorXd q(ps.dim());
      const bool near = i % 2 == 0;
      for (int j = 0; j < q.size(); ++j)
        q(j) = std::clamp(near ? 0.5 - 1.0 / n + 3.0 * u(rng) / n : u(rng), 0.0, 1.0);
      const auto d = oracle::sorted_distances(ps, q);
      const double w = (ps.point(sk.query(q).witness) - q).norm();
      // how far outside the band, relative (0 inside)
      const double over = std::max(0.0, w / ((1 + a.eps) * d[hi - 1]) - 1);
      const double under = std::max(0.0, 1 - w / ((1 - a.eps) * d[lo - 1]));
      kw = std::max({kw, over, under});
      kf += over > 0 || under > 0;
      double F = 0;
      for (long j = 0; j < a.k; ++j) F += f(d[j]);
      F /= a.k;
      const double rel = F > 0 ? std::abs(sd.query(q) - F) / F : 0;
      dw = std::max(dw, rel);
      df += rel > a.eps;
    }
    good += kf == 0 && df == 0;
    std::cout << t << ',' << seed << ',' << sk.sample_size() << ',' << sk.k_prime() << ',' << kf << ',' << kw << ','
              << sd.sample_size() << ',' << df << ',' << dw << '\n';
  }
  std::cout << "# trials without failures: " << good << "/" << a.trials
            << (binomial_guard(good, a.trials, 1 - a.phi) ? " (consistent with 1-phi)" : " (below 1-phi, p < 0.01)")
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approximate k-th nearest neighbor distance sketches"};
  app.set_version_flag("--version", kLibraryVersion);
  app.require_subcommand(1);

  BuildArgs b;
  auto* build = app.add_subcommand("build", "build a sketch from a point file");
  build->add_option("--input,-i", b.input, "points, one per line")->required();
  build->add_option("--out,-o", b.out, "sketch file")->required();
  build->add_option("--kind", b.kind, "kavd | knnq | const | density | sample")->capture_default_str();
  build->add_option("--k", b.p.k, "rank");
  build->add_option("--tau", b.p.tau, "weight threshold (weighted kavd or knnq)");
  build->add_option("--eps", b.p.eps, "approximation")->capture_default_str();
  build->add_option("--phi", b.p.phi, "failure probability (sample)")->capture_default_str();
  build->add_option("--seed", b.p.seed, "random seed")->capture_default_str();
  build->add_option("--f", b.p.f, "l1 | l2sq | pow:<p> (density)")->capture_default_str();
  build->add_option("--alpha", b.p.alpha, "density inner precision divisor: literal (4c), tight (4c(1-eps)/3) or a number")->capture_default_str();

  QueryArgs q;
  auto* query = app.add_subcommand("query", "answer a batch of queries");
  query->add_option("--sketch,-s", q.sketch)->required();
  query->add_option("--queries,-q", q.queries)->required();
  query->add_option("--input,-i", q.input, "original points, for --oracle");
  query->add_flag("--oracle", q.oracle, "compare with exact values; exit 3 on a violation");
  query->add_flag("--clamp", q.clamp, "clamp out-of-domain queries instead of skipping them");

  std::string suite = "all";
  auto* accept = app.add_subcommand("accept", "run acceptance suites");
  accept->add_option("--suite", suite, "suite name or all")->capture_default_str();

  OracleArgs o;
  auto* orc = app.add_subcommand("oracle", "exact values by brute force");
  orc->add_option("--input,-i", o.input)->required();
  orc->add_option("--queries,-q", o.queries)->required();
  orc->add_option("--k", o.k)->required();
  orc->add_option("--f", o.f)->capture_default_str();
  orc->add_option("--eps", o.eps, "tail cut for aD")->capture_default_str();

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "per-trial errors of the sampled estimators");
  sample->add_option("--input,-i", sa.input)->required();
  sample->add_option("--k", sa.k)->required();
  sample->add_option("--eps", sa.eps)->capture_default_str();
  sample->add_option("--phi", sa.phi)->capture_default_str();
  sample->add_option("--seed", sa.seed)->capture_default_str();
  sample->add_option("--trials", sa.trials)->capture_default_str();
  sample->add_option("--queries", sa.queries)->capture_default_str();
  sample->add_option("--f", sa.f)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }
  try {
    if (*build) return cmd_build(b);
    if (*query) return cmd_query(q);
    if (*accept) return cmd_accept(suite);
    if (*orc) return cmd_oracle(o);
    if (*sample) return cmd_sample(sa);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
