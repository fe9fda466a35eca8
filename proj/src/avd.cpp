#include "prox/avd.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace prox {

namespace {

constexpr double kUlp = std::numeric_limits<double>::epsilon();

}  // namespace

// ---------------------------------------------------------------- PointAvd

PointAvd PointAvd::build(const Eigen::MatrixXd& sites, double eps, bool base_only, int floor_level) {
  const int D = static_cast<int>(sites.rows());
  const Eigen::Index m = sites.cols();
  if (m < 1) throw InvalidArgument("point avd: no sites");
  if (D < (base_only ? 2 : 1) || D > kMaxDim) throw InvalidArgument("point avd: unsupported dimension");
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("point avd: eps must lie in (0,1)");
  if (!sites.allFinite() || (sites.array() < 0).any() || (sites.array() > 1).any())
    throw InvalidArgument("point avd: sites must lie in [0,1]^D");
  floor_level = std::clamp(floor_level, kMinLevel, 0);

  PointAvd out;
  out.sites_ = sites;
  out.eps_ = eps;
  out.base_only_ = base_only;
  const int qdim = base_only ? D - 1 : D;  // dimensions a query can move in
  const double diag = std::sqrt(double(qdim));

  struct Frame {
    CanonicalCube cube;
    std::vector<int> cand;
    double pruned;  // lower bound on the distance to every dropped site
  };
  std::vector<Frame> stack;
  {
    Frame f{CanonicalCube::root(D), std::vector<int>(m), HUGE_VAL};
    for (Eigen::Index j = 0; j < m; ++j) f.cand[j] = static_cast<int>(j);
    stack.push_back(std::move(f));
  }
  std::vector<CanonicalCube> leaves;
  std::vector<std::int32_t> reps;
  Vector lo(D), hi(D), z(D);
  std::vector<double> lo_s, up_s;
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const CanonicalCube& c = f.cube;
    for (int i = 0; i < D; ++i) {
      lo(i) = c.low(i);
      hi(i) = lo(i) + c.side();
      z(i) = c.center(i);
    }
    if (base_only) hi(D - 1) = lo(D - 1) = z(D - 1) = 0.0;
    const double h = 0.5 * c.side() * diag;

    lo_s.resize(f.cand.size());
    up_s.resize(f.cand.size());
    double minup = HUGE_VAL;
    for (std::size_t t = 0; t < f.cand.size(); ++t) {
      lo_s[t] = std::sqrt(box_min_dist2(sites.col(f.cand[t]), lo, hi));
      up_s[t] = std::sqrt(box_max_dist2(sites.col(f.cand[t]), lo, hi));
      minup = std::min(minup, up_s[t]);
    }
    std::vector<int> keep;
    double pruned = f.pruned;
    for (std::size_t t = 0; t < f.cand.size(); ++t) {
      if (lo_s[t] <= minup) keep.push_back(f.cand[t]);
      else pruned = std::min(pruned, lo_s[t]);
    }
    int rep = -1;
    double d1 = HUGE_VAL;
    for (int s : keep) {
      const double ds = (sites.col(s) - z).norm();
      if (ds < d1) {
        d1 = ds;
        rep = s;
      }
    }
    // every q in the cell: dist(q,rep) <= far <= (1+eps) dist(q,s), either by the
    // box bounds or by the triangle inequality through |rep - s|
    const double far = std::sqrt(box_max_dist2(sites.col(rep), lo, hi)) * (1 + 4 * kUlp);
    bool cert = keep.size() == 1 || h * (2 + eps) * (1 + 4 * kUlp) <= eps * d1;
    if (!cert) {
      cert = (1 + eps) * pruned >= far;
      for (std::size_t t = 0; cert && t < f.cand.size(); ++t) {
        const int s = f.cand[t];
        if (s == rep || lo_s[t] > minup) continue;
        cert = (1 + eps) * lo_s[t] >= far || (sites.col(rep) - sites.col(s)).norm() * (1 + 4 * kUlp) <= eps * lo_s[t];
      }
    }
    if (cert || c.level <= floor_level) {
      if (!cert) ++out.uncertified_;
      CanonicalCube e = c;
      if (base_only) {
        e.dim = D - 1;
        e.corner[D - 1] = 0;
      }
      leaves.push_back(e);
      reps.push_back(rep);
      continue;
    }
    const unsigned nchild = 1u << qdim;  // base mode: last axis bit stays 0
    for (unsigned mask = 0; mask < nchild; ++mask) stack.push_back({c.child(mask), keep, pruned});
  }
  out.leaves_ = leaves.size();
  out.tree_ = CompressedQuadtree::from_cubes(qdim, std::move(leaves), reps);
  return out;
}

int PointAvd::query(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  const int D = static_cast<int>(sites_.rows());
  if (q.size() != tree_.dim()) throw InvalidArgument("point avd: query dimension mismatch");
  if (!in_unit_cube(q)) throw DomainError("point avd: query outside the unit cube");
  int v = tree_.locate(q);
  while (v >= 0 && tree_.node(v).payload < 0) v = tree_.node(v).parent;
  if (v >= 0) return tree_.node(v).payload;
  // not reachable for a complete subdivision; answer exactly
  Vector x = Vector::Zero(D);
  x.head(q.size()) = q;
  Eigen::Index best;
  (sites_.colwise() - Eigen::VectorXd(x)).colwise().norm().minCoeff(&best);
  return static_cast<int>(best);
}

// ---------------------------------------------------------- ConstantFactor

ConstantFactor ConstantFactor::build(const PointSet& ps, long k, std::uint64_t seed) {
  return from_clustering(ps, quorum_cluster(ps, k), seed);
}

ConstantFactor ConstantFactor::from_clustering(const PointSet& ps, const QuorumClustering& qc, std::uint64_t seed) {
  const int d = ps.dim();
  const Eigen::Index m = static_cast<Eigen::Index>(qc.balls.size());
  if (m == 0) throw InvalidArgument("constant factor: empty clustering");
  ConstantFactor cf;
  cf.centers_.resize(d, m);
  Eigen::MatrixXd lifted(d + 1, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& b = qc.balls[j];
    cf.centers_.col(j) = b.center;
    cf.radii_.push_back(b.radius);
    lifted.col(j) = lift(b.center, b.radius);
    // sampled member: the real member farthest from the center
    Eigen::Index pick = -1;
    double far = -1;
    for (auto i : b.members) {
      if (i == qc.pad_index || ps.synthetic(i)) continue;
      const double t = (ps.point(i) - b.center).norm();
      if (t > far) {
        far = t;
        pick = i;
      }
    }
    cf.member_.push_back(pick);
  }
  auto L = normalize(lifted);
  cf.lift_ = L.transform();
  cf.ann_ = KnnQueryStructure::build(L, seed);
  return cf;
}

ConstantFactor::Answer ConstantFactor::query(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (q.size() != centers_.rows()) throw InvalidArgument("constant factor: query dimension mismatch");
  Eigen::VectorXd qh = Eigen::VectorXd::Zero(q.size() + 1);
  qh.head(q.size()) = q;
  KnnOptions opt;
  opt.check_domain = false;
  // (1+eps) <= sqrt(2) in Euclidean terms gives a 2-ANN in the product norm
  const auto r = ann_.knn_distance(lift_.to_normalized(qh), 1, std::sqrt(2.0) - 1, opt);
  const int j = static_cast<int>(r.witness);
  Answer a;
  a.cluster = j;
  a.value = (q - centers_.col(j)).norm() + radii_[j];
  a.witness = member_[j];
  return a;
}

// --------------------------------------------------------------- KAVD build

struct KavdBuilder {
  const PointSet& ps;
  const QuorumClustering& qc;
  bool weighted;
  double need;  // k or tau
  double eps;
  KavdOptions opt;
  int d = 0;
  int floor_level = 0;

  KnnQueryStructure knn;
  std::vector<Vector> centers;
  std::vector<double> radii, rhos;
  std::vector<Eigen::Index> member;  // pnt_rep_X per cluster, -1 if none
  std::vector<int> site_cluster;
  PointAvd S;

  struct Info {
    int cluster;
    double adknn;
    Eigen::Index knnrep;
    std::uint8_t cert;  // bit 0: knnrep witness certified, bit 1: member witness certified
    bool ok;
  };
  std::unordered_map<CanonicalCube, Info, CubeHash> cache;
  KavdStats stats;

  KavdBuilder(const PointSet& p, const QuorumClustering& q, bool w, double nd, double e, const KavdOptions& o)
      : ps(p), qc(q), weighted(w), need(nd), eps(e), opt(o), d(p.dim()) {}

  bool exact_k1() const { return !weighted && need == 1.0; }

  Info evaluate(const CanonicalCube& c) {
    ++stats.evaluated;
    const Vector rep = c.center();
    const double h = c.half_diagonal();
    Info info{};
    const int sn = S.tree().lowest_containing(c);
    const int site = S.tree().node(sn).payload;
    bool empty_region = false;
    if (site >= 0) {
      info.cluster = site_cluster[site];
    } else {
      // c is tiled by smaller S cells, all present in the tree: nothing lands here
      empty_region = true;
      double best = HUGE_VAL;
      for (int s : site_cluster) {
        const double t = (rep - centers[s]).norm() + radii[s];
        if (t < best) {
          best = t;
          info.cluster = s;
        }
      }
    }
    const KnnResult r = weighted ? knn.knn_distance_weighted(rep, need, eps / 4)
                                 : knn.knn_distance(rep, static_cast<long>(need), eps / 4);
    info.adknn = r.beta;
    info.knnrep = r.witness;
    info.ok = true;
    if (empty_region || !opt.refine) return info;

    const int j = info.cluster;
    const double t1 = (rep - centers[j]).norm() + radii[j];
    const double U = std::min(t1, r.beta) + h;
    const double L1 = std::max(r.lower, r.beta / (1 + eps / 4)) - h;
    // anchor bound: the first ball to take one of q's k nearest has rho <= 2 d_k and
    // lies within d_k + r of q
    double L2 = HUGE_VAL;
    for (std::size_t i = 0; i < centers.size(); ++i)
      L2 = std::min(L2, std::max(rhos[i] / 2, cube_min_dist(c, centers[i]) - radii[i]));
    const double L = std::max(L1, L2) * (1 - 8 * kUlp);
    const double Ug = U * (1 + 8 * kUlp);
    const bool value_ok = L > 0 && Ug <= (1 + eps) * L;
    auto witness_ok = [&](Eigen::Index w) {
      if (w < 0) return false;
      const double dw = (ps.point(w) - rep).norm();
      return (dw + h) * (1 + 4 * kUlp) <= (1 + eps) * L && (dw - h) >= (1 - eps) * Ug;
    };
    info.cert = static_cast<std::uint8_t>((witness_ok(r.witness) ? 1 : 0) | (witness_ok(member[j]) ? 2 : 0));
    info.ok = value_ok && info.cert != 0;

    if (!info.ok && exact_k1() && radii[j] == 0.0) {
      // whole cell inside the Voronoi region of cluster j's single point
      const double d1 = (rep - centers[j]).norm();
      double d2 = HUGE_VAL;
      for (std::size_t i = 0; i < centers.size(); ++i)
        if (static_cast<int>(i) != j) d2 = std::min(d2, (rep - centers[i]).norm() - radii[i]);
      if (d2 - h >= (d1 + h) * (1 + 8 * kUlp)) {
        info.ok = true;
        info.cert = 2;
      }
    }
    return info;
  }

  KavdSketch run() {
    const Eigen::Index n = ps.size();
    if (!(eps > 0 && eps <= 0.5)) throw InvalidArgument("kavd: eps must lie in (0, 1/2]");
    if (d > kMaxDim - 1) throw InvalidArgument("kavd: dimension too large for the lifted construction");
    if (!(opt.zeta1 > 0)) throw InvalidArgument("kavd: zeta1 must be positive");
    if (!(opt.avd_factor > 0 && opt.avd_factor <= 1)) throw InvalidArgument("kavd: avd_factor must lie in (0,1]");
    for (Eigen::Index j = 0; j < n; ++j)
      if (!ps.synthetic(j) && !in_unit_cube(ps.point(j))) throw DomainError("kavd: points must be normalized");

    knn = KnnQueryStructure::build(ps, opt.seed);
    for (const auto& b : qc.balls) {
      centers.push_back(b.center);
      radii.push_back(b.radius);
      rhos.push_back(b.rho);
      Eigen::Index pick = -1;
      double far = -1;
      for (auto i : b.members) {
        if (i == qc.pad_index || ps.synthetic(i)) continue;
        const double t = (ps.point(i) - b.center).norm();
        if (t > far) {
          far = t;
          pick = i;
        }
      }
      member.push_back(pick);
    }
    stats.clusters = centers.size();

    double rmin = HUGE_VAL;
    for (double r : rhos)
      if (r > 0) rmin = std::min(rmin, r);
    if (!std::isfinite(rmin)) rmin = std::ldexp(1.0, -30);
    floor_level = opt.floor_level <= 0
                      ? std::max(opt.floor_level, kMinLevel + 1)
                      : std::clamp(static_cast<int>(std::floor(std::log2(eps * rmin))) - 8, kMinLevel + 1, 0);
    stats.floor_level = floor_level;

    // S: lifted AVD at eps/8, clipped to the base face
    std::vector<int> usable;
    for (std::size_t i = 0; i < centers.size(); ++i)
      if (in_unit_cube(centers[i]) && radii[i] <= 1.0 && member[i] >= 0) usable.push_back(static_cast<int>(i));
    if (usable.empty()) throw ContractViolation("kavd: no cluster inside the domain");
    Eigen::MatrixXd sites(d + 1, usable.size());
    for (std::size_t s = 0; s < usable.size(); ++s) sites.col(s) = lift(centers[usable[s]], radii[usable[s]]);
    site_cluster = usable;
    S = PointAvd::build(sites, std::min(eps * opt.avd_factor, 0.5), true, floor_level);
    stats.s_cells = S.tree().size();

    // X: environ grids around every cluster
    std::unordered_set<CanonicalCube, CubeHash> xs;
    const int J = static_cast<int>(std::ceil(std::log2(32 / eps) + 1));
    const double fine = std::ldexp(1.0, floor_level);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (!in_unit_cube(centers[i])) continue;
      const double reff = std::max(radii[i], std::ldexp(1.0, kMinLevel));
      for (int j = 0; j <= J; ++j) {
        const double R = std::ldexp(reff, j);
        const double psi = std::max(eps / (opt.zeta1 * d) * R, fine);
        for (const auto& c : cells_intersecting_ball(Ball{centers[i], R}, psi, floor_level)) xs.insert(c);
      }
    }
    stats.x_cells = xs.size();
    auto X = CompressedQuadtree::from_cubes(d, std::vector<CanonicalCube>(xs.begin(), xs.end()));
    auto W = overlay(X, S.tree());
    stats.overlay_cells = W.tree.size();

    std::vector<CanonicalCube> work;
    for (const auto& nd : W.tree.nodes()) work.push_back(nd.cube);
    CompressedQuadtree tree;
    while (true) {
      while (!work.empty()) {
        const CanonicalCube c = work.back();
        work.pop_back();
        if (cache.count(c)) continue;
        const Info info = evaluate(c);
        cache.emplace(c, info);
        if (!info.ok) {
          if (c.level > floor_level) {
            ++stats.split;
            for (unsigned m = 0; m < (1u << d); ++m) work.push_back(c.child(m));
          }
        }
      }
      std::vector<CanonicalCube> all;
      all.reserve(cache.size());
      for (const auto& [c, info] : cache) all.push_back(c);
      tree = CompressedQuadtree::from_cubes(d, std::move(all));
      for (const auto& nd : tree.nodes())
        if (!cache.count(nd.cube)) work.push_back(nd.cube);
      if (work.empty()) break;
    }

    KavdSketch sk;
    sk.tree_ = std::move(tree);
    sk.transform_ = ps.transform();
    sk.weighted_ = weighted;
    sk.k_ = weighted ? 0 : static_cast<long>(need);
    sk.tau_ = need;
    sk.eps_ = eps;
    std::unordered_map<Eigen::Index, std::int32_t> slot;
    auto slot_of = [&](Eigen::Index i) -> std::int32_t {
      if (i < 0) return -1;
      auto [it, fresh] = slot.emplace(i, static_cast<std::int32_t>(sk.slot_ids_.size()));
      if (fresh) sk.slot_ids_.push_back(i);
      return it->second;
    };
    for (std::size_t i = 0; i < centers.size(); ++i)
      sk.clusters_.push_back({centers[i], radii[i], slot_of(member[i])});
    sk.cells_.resize(sk.tree_.size());
    for (std::size_t v = 0; v < sk.tree_.size(); ++v) {
      const auto& info = cache.at(sk.tree_.node(static_cast<int>(v)).cube);
      sk.cells_[v] = {info.cluster, info.adknn, slot_of(info.knnrep), info.cert};
      const auto& nd = sk.tree_.node(static_cast<int>(v));
      const bool covered = nd.child_count == (1 << d) &&
                           std::all_of(sk.tree_.children(static_cast<int>(v)).begin(),
                                       sk.tree_.children(static_cast<int>(v)).end(),
                                       [&](int ch) { return sk.tree_.node(ch).cube.level == nd.cube.level - 1; });
      if (!info.ok && !covered) ++stats.uncertified;
    }
    sk.slot_coords_.resize(d, sk.slot_ids_.size());
    for (std::size_t s = 0; s < sk.slot_ids_.size(); ++s) sk.slot_coords_.col(s) = ps.point(sk.slot_ids_[s]);
    sk.stats_ = stats;
    return sk;
  }
};

KavdSketch KavdSketch::build(const PointSet& ps, long k, double eps, const KavdOptions& opt) {
  if (k < 1 || k > ps.size()) throw InvalidArgument("kavd: k out of range");
  const auto qc = quorum_cluster(ps, k);
  return KavdBuilder(ps, qc, false, static_cast<double>(k), eps, opt).run();
}

KavdSketch KavdSketch::build_weighted(const PointSet& ps, double tau, double eps, const KavdOptions& opt) {
  const auto qc = quorum_cluster_weighted(ps, tau);
  return KavdBuilder(ps, qc, true, tau, eps, opt).run();
}

KavdAnswer KavdSketch::query(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (q.size() != dim()) throw InvalidArgument("kavd: query dimension mismatch");
  if (!q.allFinite()) throw InvalidArgument("kavd: non-finite query");
  if (!in_unit_cube(q)) throw DomainError("kavd: query outside [0,1]^d");
  return answer_at(q, tree_.locate(q));
}

KavdAnswer KavdSketch::answer_at(const Eigen::Ref<const Eigen::VectorXd>& q, int node) const {
  const Cell& c = cells_[node];
  const ClusterRec& cl = clusters_[c.cluster];
  const double t1 = (q - cl.center).norm() + cl.radius;
  const double t2 = c.adknn + (q - rep(node)).norm();
  KavdAnswer a;
  a.node = node;
  a.first_term = t1 <= t2;
  // absorbs the rounding of both terms so the value never undercuts d_k
  a.value = std::min(t1, t2) * (1 + 4 * kUlp);

  std::int32_t natural = a.first_term ? cl.member : c.knnrep;
  std::int32_t other = a.first_term ? c.knnrep : cl.member;
  if (natural < 0) std::swap(natural, other);
  auto inside = [&](std::int32_t s) {
    if (s < 0) return false;
    const double t = (q - slot_coords_.col(s)).norm();
    return t >= (1 - eps_) * a.value && t <= a.value;
  };
  auto certified = [&](std::int32_t s) {
    return s >= 0 && ((s == c.knnrep && (c.cert & 1)) || (s == cl.member && (c.cert & 2)));
  };
  std::int32_t pick = natural;
  if (!inside(natural)) {
    if (inside(other)) pick = other;
    else if (!certified(natural) && certified(other)) pick = other;
  }
  a.witness = pick >= 0 ? slot_ids_[pick] : -1;
  return a;
}

// ------------------------------------------------------------ serialization

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw IoError("kavd: truncated sketch");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void KavdSketch::save(std::ostream& out) const {
  const int d = dim();
  out.write("KAVD", 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, weighted_ ? 1u : 0u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<double>(out, weighted_ ? tau_ : static_cast<double>(k_));
  put<double>(out, eps_);
  put<double>(out, transform_.scale);
  for (int i = 0; i < d; ++i) put<double>(out, transform_.translation.size() ? transform_.translation(i) : 0.0);

  put<std::uint64_t>(out, slot_ids_.size());
  for (std::size_t s = 0; s < slot_ids_.size(); ++s) {
    put<std::int64_t>(out, slot_ids_[s]);
    for (int i = 0; i < d; ++i) put<double>(out, slot_coords_(i, s));
  }
  put<std::uint64_t>(out, clusters_.size());
  for (const auto& c : clusters_) {
    for (int i = 0; i < d; ++i) put<double>(out, c.center(i));
    put<double>(out, c.radius);
    put<std::int32_t>(out, c.member);
  }
  put<std::uint64_t>(out, tree_.size());
  for (std::size_t v = 0; v < tree_.size(); ++v) {
    const auto& cube = tree_.node(static_cast<int>(v)).cube;
    put<std::int32_t>(out, cube.level);
    for (int i = 0; i < d; ++i) put<std::uint64_t>(out, cube.corner[i]);
    put<std::int32_t>(out, cells_[v].cluster);
    put<double>(out, cells_[v].adknn);
    put<std::int32_t>(out, cells_[v].knnrep);
    put<std::uint8_t>(out, cells_[v].cert);
  }
  if (!out) throw IoError("kavd: write failed");
}

KavdSketch KavdSketch::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "KAVD", 4) != 0) throw IoError("kavd: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw IoError("kavd: unsupported version " + std::to_string(version));
  KavdSketch sk;
  const auto kind = get<std::uint32_t>(in);
  if (kind > 1) throw IoError("kavd: unknown kind");
  const int d = static_cast<int>(get<std::uint32_t>(in));
  if (d < 1 || d > kMaxDim - 1) throw IoError("kavd: bad dimension");
  sk.weighted_ = kind == 1;
  const double kt = get<double>(in);
  sk.tau_ = kt;
  sk.k_ = sk.weighted_ ? 0 : static_cast<long>(kt);
  sk.eps_ = get<double>(in);
  sk.transform_.scale = get<double>(in);
  sk.transform_.translation.resize(d);
  for (int i = 0; i < d; ++i) sk.transform_.translation(i) = get<double>(in);

  const auto ns = get<std::uint64_t>(in);
  sk.slot_ids_.resize(ns);
  sk.slot_coords_.resize(d, static_cast<Eigen::Index>(ns));
  for (std::size_t s = 0; s < ns; ++s) {
    sk.slot_ids_[s] = get<std::int64_t>(in);
    for (int i = 0; i < d; ++i) sk.slot_coords_(i, s) = get<double>(in);
  }
  const auto nc = get<std::uint64_t>(in);
  for (std::size_t j = 0; j < nc; ++j) {
    ClusterRec c;
    c.center.resize(d);
    for (int i = 0; i < d; ++i) c.center(i) = get<double>(in);
    c.radius = get<double>(in);
    c.member = get<std::int32_t>(in);
    if (c.member >= static_cast<std::int32_t>(ns)) throw IoError("kavd: bad member slot");
    sk.clusters_.push_back(c);
  }
  const auto nn = get<std::uint64_t>(in);
  std::vector<CanonicalCube> cubes(nn);
  std::vector<Cell> recs(nn);
  for (std::size_t v = 0; v < nn; ++v) {
    cubes[v].dim = d;
    cubes[v].level = get<std::int32_t>(in);
    for (int i = 0; i < d; ++i) cubes[v].corner[i] = get<std::uint64_t>(in);
    recs[v].cluster = get<std::int32_t>(in);
    recs[v].adknn = get<double>(in);
    recs[v].knnrep = get<std::int32_t>(in);
    recs[v].cert = get<std::uint8_t>(in);
    if (recs[v].cluster < 0 || recs[v].cluster >= static_cast<std::int32_t>(nc) ||
        recs[v].knnrep >= static_cast<std::int32_t>(ns))
      throw IoError("kavd: bad cell record");
  }
  sk.tree_ = CompressedQuadtree::from_cubes(d, cubes);
  if (sk.tree_.size() != nn) throw IoError("kavd: cell set is not closed");
  sk.cells_.resize(nn);
  for (std::size_t v = 0; v < nn; ++v) sk.cells_[*sk.tree_.find(cubes[v])] = recs[v];
  return sk;
}

}  // namespace prox
