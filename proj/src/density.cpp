#include "prox/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "prox/errors.hpp"

namespace prox {

SlowGrowFunction SlowGrowFunction::power(double p) {
  if (!(p > 0) || !std::isfinite(p)) throw InvalidArgument("pow: exponent must be positive");
  SlowGrowFunction s;
  std::ostringstream t;
  t << "pow:" << p;
  s.tag = p == 1 ? "l1" : p == 2 ? "l2sq" : t.str();
  // 2^eps <= 1 + eps on [0,1], hence (1 + eps ln2 / p)^p <= 1 + eps
  s.c = p <= 1 ? 1.0 : p / std::log(2.0);
  if (p == 1) s.f = [](double x) { return x; };
  else if (p == 2) s.f = [](double x) { return x * x; };
  else s.f = [p](double x) { return std::pow(x, p); };
  return s;
}

SlowGrowFunction SlowGrowFunction::exponential() {
  return {"exp", 1.0, [](double x) { return std::exp(x); }};
}

SlowGrowFunction SlowGrowFunction::constant() {
  return {"const", 1.0, [](double) { return 1.0; }};
}

SlowGrowFunction SlowGrowFunction::parse(const std::string& tag) {
  if (tag == "l1") return power(1);
  if (tag == "l2sq") return power(2);
  if (tag == "exp") return exponential();
  if (tag == "const") return constant();
  if (tag.rfind("pow:", 0) == 0) {
    std::size_t used = 0;
    double p = 0;
    try {
      p = std::stod(tag.substr(4), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tag.size() - 4) throw InvalidArgument("bad function tag '" + tag + "'");
    return power(p);
  }
  throw InvalidArgument("unknown function tag '" + tag + "' (l1, l2sq, pow:<p>, exp, const)");
}

void SlowGrowFunction::audit(double eps, int d) const {
  constexpr int kGrid = 64;
  const double lo = 1e-6, hi = std::sqrt(static_cast<double>(d));
  const double g = 1e-12;  // rounding guard
  double prev = -1;
  for (int i = 0; i < kGrid; ++i) {
    const double x = lo * std::pow(hi / lo, i / double(kGrid - 1));
    const double fx = f(x), fm = f((1 - eps / c) * x), fp = f((1 + eps / c) * x);
    auto fail = [&](const char* what) {
      std::ostringstream m;
      m.precision(6);
      m << "function " << tag << " is not slowly growing at x=" << x << " (eps=" << eps << ", c=" << c
        << "): " << what;
      throw InvalidFunction(m.str());
    };
    if (!(std::isfinite(fx) && fx >= 0)) fail("value not finite and nonnegative");
    if (fx < prev) fail("not monotone");
    if (fm < (1 - eps) * fx * (1 - g)) fail("drops too fast below x");
    if (fp > (1 + eps) * fx * (1 + g)) fail("grows too fast above x");
    prev = fx;
  }
}

IndexCoreset coreset_indices(long k, double eps, double ratio) {
  if (k < 1) throw InvalidArgument("coreset: k must be >= 1");
  if (!(eps > 0 && eps <= 1)) throw InvalidArgument("coreset: eps must lie in (0,1]");
  if (ratio == 0) ratio = eps / 16;
  if (!(ratio > 0)) throw InvalidArgument("coreset: ratio must be positive");
  IndexCoreset ic;
  ic.k = k;
  ic.eps = eps;
  ic.ratio = ratio;
  long i = static_cast<long>(std::ceil(k * eps / 8));
  i = std::clamp(i, 1L, k);
  while (i < k) {
    ic.indices.push_back(i);
    const long nx = std::min(k, std::max(i + 1, static_cast<long>(std::ceil(i * (1 + ratio)))));
    ic.weights.push_back(nx - i);
    i = nx;
  }
  ic.indices.push_back(k);
  ic.weights.push_back(1);
  return ic;
}

double coreset_estimate(const IndexCoreset& ic, const std::vector<double>& g) {
  if (g.size() != ic.indices.size()) throw InvalidArgument("coreset_estimate: one sample per index");
  double s = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (j > 0 && g[j] < g[j - 1]) throw ContractViolation("coreset_estimate: samples not monotone");
    s += static_cast<double>(ic.weights[j]) * g[j];
  }
  return s;
}

namespace {

// sorted real distances, local on purpose (the checked code must not share the test oracle)
std::vector<double> scan(const PointSet& ps, const Eigen::VectorXd& q) {
  std::vector<double> d;
  d.reserve(ps.size());
  for (Eigen::Index j = 0; j < ps.size(); ++j)
    if (!ps.synthetic(j)) d.push_back((ps.point(j) - q).norm());
  std::sort(d.begin(), d.end());
  return d;
}

bool coreset_holds(const IndexCoreset& ic, const SlowGrowFunction& f, const std::vector<double>& dist) {
  double aD = 0;
  for (long i = ic.first(); i <= ic.k; ++i) aD += f(dist[i - 1]);
  std::vector<double> g;
  for (long i : ic.indices) g.push_back(f(dist[i - 1]));
  const double est = coreset_estimate(ic, g);
  const double e4 = ic.eps / 4;
  return (1 - e4) * est <= aD * (1 + 1e-12) && aD <= (1 + e4) * est * (1 + 1e-12);
}

}  // namespace

double tight_alpha(double c, double eps) { return 4 * c * (1 - eps) / 3; }

DensityStructure DensityStructure::build(const PointSet& ps, long k, double eps, const SlowGrowFunction& f,
                                         const DensityOptions& opt) {
  if (k < 1 || k > ps.real_count()) throw InvalidArgument("density: k out of range");
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("density: eps must lie in (0,1)");
  if (!f.f) throw InvalidArgument("density: no function");
  f.audit(eps, ps.dim());
  DensityStructure ds;
  ds.f_ = f;
  ds.eps_ = eps;
  ds.alpha_ = opt.alpha > 0 ? opt.alpha : 4 * f.c;
  // z_i is off by (1 + eps/alpha) = (1 + eps'/c): f must be slowly growing at eps' too
  const double inner_eps = f.c * eps / ds.alpha_;
  if (!(inner_eps < 1)) throw InvalidArgument("density: alpha too small for this eps");
  if (inner_eps != eps) f.audit(inner_eps, ps.dim());
  const double inner = std::min(eps / ds.alpha_, 0.5);

  // validate the index coreset on real distance sequences before paying for sketches
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> seqs;
  const auto real = ps.real_points();
  for (int t = 0; t < opt.audit_queries; ++t) {
    Eigen::VectorXd q(ps.dim());
    if (t % 2 == 0) {
      q = real.point(static_cast<Eigen::Index>(u(rng) * real.size()) % real.size());
      for (int i = 0; i < q.size(); ++i) q(i) = std::clamp(q(i) + (u(rng) - 0.5) / real.size(), 0.0, 1.0);
    } else {
      for (int i = 0; i < q.size(); ++i) q(i) = u(rng);
    }
    seqs.push_back(scan(real, q));
  }
  double ratio = eps / 16;
  for (ds.retries_ = 0;; ++ds.retries_) {
    ds.coreset_ = coreset_indices(k, eps, ratio);
    bool ok = true;
    for (const auto& s : seqs) ok = ok && coreset_holds(ds.coreset_, f, s);
    if (ok) break;
    if (ds.retries_ == opt.max_retries) throw ContractViolation("density: index coreset failed validation");
    ratio /= 2;
  }

  for (long i : ds.coreset_.indices) ds.sketches_.push_back(KavdSketch::build(pad_to_multiple(ps, i), i, inner, opt.kavd));
  ds.make_locator();
  return ds;
}

void DensityStructure::make_locator() {
  std::vector<const CompressedQuadtree*> trees;
  for (const auto& s : sketches_) trees.push_back(&s.tree());
  locator_ = std::make_shared<SimultaneousLocator>(trees);
}

std::size_t DensityStructure::cell_count() const {
  std::size_t c = 0;
  for (const auto& s : sketches_) c += s.cell_count();
  return c;
}

std::vector<double> DensityStructure::finish(const Eigen::Ref<const Eigen::VectorXd>& q,
                                             const std::vector<std::int32_t>& nodes) const {
  std::vector<double> z(nodes.size());
  double run = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    run = std::max(run, sketches_[i].answer_at(q, nodes[i]).value);
    z[i] = run;
  }
  return z;
}

static void check_query(const Eigen::Ref<const Eigen::VectorXd>& q, int d) {
  if (q.size() != d) throw InvalidArgument("density: query dimension mismatch");
  if (!q.allFinite()) throw InvalidArgument("density: non-finite query");
  if (!in_unit_cube(q)) throw DomainError("density: query outside [0,1]^d");
}

std::vector<double> DensityStructure::distances(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_query(q, dim());
  return finish(q, locator_->locate_all(q));
}

std::vector<double> DensityStructure::distances_separately(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_query(q, dim());
  std::vector<std::int32_t> nodes;
  for (const auto& s : sketches_) nodes.push_back(s.tree().locate(q));
  return finish(q, nodes);
}

double DensityStructure::query(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  const auto z = distances(q);
  double xi = 0;
  for (std::size_t i = 0; i < z.size(); ++i) xi += static_cast<double>(coreset_.weights[i]) * f_(z[i]);
  return xi;
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("density: truncated file");
  return v;
}

}  // namespace

void DensityStructure::save(std::ostream& out) const {
  out.write("KDEN", 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f_.tag.size()));
  out.write(f_.tag.data(), static_cast<std::streamsize>(f_.tag.size()));
  put<double>(out, eps_);
  put<double>(out, alpha_);
  put<double>(out, coreset_.ratio);
  put<std::int64_t>(out, coreset_.k);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(coreset_.size()));
  for (std::size_t j = 0; j < coreset_.size(); ++j) {
    put<std::int64_t>(out, coreset_.indices[j]);
    put<std::int64_t>(out, coreset_.weights[j]);
  }
  for (const auto& s : sketches_) s.save(out);
  if (!out) throw IoError("density: write failed");
}

DensityStructure DensityStructure::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "KDEN", 4) != 0) throw IoError("density: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw IoError("density: unsupported version " + std::to_string(version));
  const auto len = get<std::uint32_t>(in);
  if (len > 64) throw IoError("density: bad function tag");
  std::string tag(len, '\0');
  if (!in.read(tag.data(), len)) throw IoError("density: truncated file");
  DensityStructure ds;
  try {
    ds.f_ = SlowGrowFunction::parse(tag);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("density: ") + e.what());
  }
  ds.eps_ = get<double>(in);
  ds.alpha_ = get<double>(in);
  ds.coreset_.ratio = get<double>(in);
  ds.coreset_.k = get<std::int64_t>(in);
  ds.coreset_.eps = ds.eps_;
  const auto m = get<std::uint32_t>(in);
  if (m == 0 || m > ds.coreset_.k) throw IoError("density: bad coreset size");
  for (std::uint32_t j = 0; j < m; ++j) {
    ds.coreset_.indices.push_back(get<std::int64_t>(in));
    ds.coreset_.weights.push_back(get<std::int64_t>(in));
  }
  for (std::uint32_t j = 0; j < m; ++j) ds.sketches_.push_back(KavdSketch::load(in));
  ds.make_locator();
  return ds;
}

}  // namespace prox
