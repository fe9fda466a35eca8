#include "prox/quorum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <string>

namespace prox {

namespace {

constexpr int kGridBits = 40;

struct Fenwick {
  std::vector<double> t;
  explicit Fenwick(std::size_t n = 0) : t(n + 1, 0.0) {}
  void add(std::size_t i, double v) {
    for (++i; i < t.size(); i += i & (~i + 1)) t[i] += v;
  }
  double prefix(std::size_t i) const {  // sum of [0, i)
    double s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += t[i];
    return s;
  }
};

using Lattice = std::array<std::uint64_t, kMaxDim>;

bool z_less(const Lattice& a, const Lattice& b, int d) {
  int best = 0;
  std::uint64_t hi = 0;
  for (int i = 0; i < d; ++i) {
    const std::uint64_t x = a[i] ^ b[i];
    if (hi < x && hi < (hi ^ x)) {
      hi = x;
      best = i;
    }
  }
  return a[best] < b[best];
}

struct Hit {
  double dist;
  Eigen::Index idx;
  bool operator<(const Hit& o) const { return dist < o.dist || (dist == o.dist && idx < o.idx); }
};

// Remaining points in Z-order over a private integer grid, with alive
// weights in a Fenwick tree so any aligned cell is counted in O(log n).
class LiveGrid {
 public:
  LiveGrid(const PointSet& ps, const std::vector<double>& w) : ps_(ps), w_(w), d_(ps.dim()) {
    const Eigen::Index n = ps.size();
    lo_ = ps.coords().minCoeff();
    double hi = std::max(ps.coords().maxCoeff(), kSyntheticCoord);
    lo_ = std::min(lo_, 0.0);
    const double width = (hi - lo_) * (1 + 1e-9) + 1e-300;
    scale_ = std::ldexp(1.0, kGridBits) / width;
    lat_.resize(n);
    const double top = std::ldexp(1.0, kGridBits) - 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      lat_[j].fill(0);
      for (int i = 0; i < d_; ++i)
        lat_[j][i] = static_cast<std::uint64_t>(std::clamp(std::floor((ps.coords()(i, j) - lo_) * scale_), 0.0, top));
    }
    order_.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) order_[j] = j;
    std::stable_sort(order_.begin(), order_.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return z_less(lat_[a], lat_[b], d_); });
    rank_.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) rank_[order_[r]] = r;
    fw_ = Fenwick(n);
    alive_.assign(n, 1);
    for (Eigen::Index j = 0; j < n; ++j) fw_.add(rank_[j], w_[j]);
  }

  bool alive(Eigen::Index j) const { return alive_[j]; }
  void remove(Eigen::Index j) {
    alive_[j] = 0;
    fw_.add(rank_[j], -w_[j]);
  }

  // distance from p to the point completing weight `target` among live
  // points, plus those points in (distance, index) order. t is a lower bound.
  double kth(Eigen::Index p, double target, double t, std::vector<Hit>* members) {
    double R = t * scale_ + 1.0;  // lattice radius, one unit of rounding slack
    while (true) {
      collect_cells(p, R);
      double cnt = 0;
      for (auto [a, b] : ranges_) cnt += fw_.prefix(b) - fw_.prefix(a);
      if (cnt < target && !whole_) {
        R *= 2;
        continue;
      }
      hits_.clear();
      for (auto [a, b] : ranges_)
        for (std::size_t r = a; r < b; ++r) {
          const Eigen::Index j = order_[r];
          if (alive_[j]) hits_.push_back({(ps_.point(j) - ps_.point(p)).norm(), j});
        }
      std::sort(hits_.begin(), hits_.end());
      double acc = 0;
      std::size_t m = 0;
      while (m < hits_.size()) {
        acc += w_[hits_[m].idx];
        ++m;
        if (acc >= target) break;
      }
      if (m == 0) throw ContractViolation("quorum: no live points");
      const double dstar = hits_[m - 1].dist;
      if (whole_ || dstar * scale_ + 1.0 <= R) {
        if (members) members->assign(hits_.begin(), hits_.begin() + m);
        return dstar;
      }
      R = dstar * scale_ + 1.0;
    }
  }

 private:
  void collect_cells(Eigen::Index p, double R) {
    ranges_.clear();
    int s = R <= 1 ? 0 : static_cast<int>(std::ceil(std::log2(R)));
    whole_ = s >= kGridBits;
    if (whole_) {
      ranges_.push_back({0, order_.size()});
      return;
    }
    const double side = std::ldexp(1.0, s);
    const std::int64_t cells = std::int64_t{1} << (kGridBits - s);
    double u[kMaxDim];
    std::int64_t a0[kMaxDim], a1[kMaxDim];
    for (int i = 0; i < d_; ++i) {
      u[i] = (ps_.coords()(i, p) - lo_) * scale_;
      a0[i] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((u[i] - R) / side)));
      a1[i] = std::min<std::int64_t>(cells - 1, static_cast<std::int64_t>(std::floor((u[i] + R) / side)));
    }
    std::int64_t a[kMaxDim];
    for (int i = 0; i < d_; ++i) a[i] = a0[i];
    while (true) {
      double g = 0;
      for (int i = 0; i < d_; ++i) {
        const double l = a[i] * side, h = l + side;
        const double t = u[i] < l ? l - u[i] : (u[i] > h ? u[i] - h : 0.0);
        g += t * t;
      }
      if (g <= R * R) {
        Lattice lo{}, hi{};
        for (int i = 0; i < d_; ++i) {
          lo[i] = static_cast<std::uint64_t>(a[i]) << s;
          hi[i] = lo[i] + (std::uint64_t{1} << s) - 1;
        }
        auto cmp_lo = [&](Eigen::Index j, const Lattice& x) { return z_less(lat_[j], x, d_); };
        auto cmp_hi = [&](const Lattice& x, Eigen::Index j) { return z_less(x, lat_[j], d_); };
        const std::size_t b0 = std::lower_bound(order_.begin(), order_.end(), lo, cmp_lo) - order_.begin();
        const std::size_t b1 = std::upper_bound(order_.begin() + b0, order_.end(), hi, cmp_hi) - order_.begin();
        if (b0 < b1) ranges_.push_back({b0, b1});
      }
      int i = 0;
      while (i < d_ && a[i] == a1[i]) {
        a[i] = a0[i];
        ++i;
      }
      if (i == d_) break;
      ++a[i];
    }
  }

  const PointSet& ps_;
  const std::vector<double>& w_;
  int d_;
  double lo_ = 0, scale_ = 1;
  std::vector<Lattice> lat_;
  std::vector<Eigen::Index> order_, rank_;
  Fenwick fw_;
  std::vector<char> alive_;
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
  std::vector<Hit> hits_;
  bool whole_ = false;
};

// brute force over the live set
double reference_kth(const PointSet& ps, const std::vector<double>& w, const std::vector<char>& alive, Eigen::Index p,
                     double target, std::vector<Hit>* members) {
  std::vector<Hit> h;
  for (Eigen::Index j = 0; j < ps.size(); ++j)
    if (alive[j]) h.push_back({(ps.point(j) - ps.point(p)).norm(), j});
  std::sort(h.begin(), h.end());
  double acc = 0;
  std::size_t m = 0;
  while (m < h.size()) {
    acc += w[h[m].idx];
    ++m;
    if (acc >= target) break;
  }
  if (members) members->assign(h.begin(), h.begin() + m);
  return h[m - 1].dist;
}

struct CenterKey {
  bool operator()(const Vector& a, const Vector& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

// later rounds landing on an earlier center are nudged along the first axis
void make_distinct(Cluster& c, std::set<Vector, CenterKey>& seen) {
  while (seen.count(c.center)) {
    const double x = c.center(0);
    double y = x + std::ldexp(1.0, kMinLevel);
    if (y == x) y = std::nextafter(x, HUGE_VAL);
    c.center(0) = y;
    c.radius = std::nextafter(c.radius + (y - x), HUGE_VAL);
    c.jittered = true;
  }
  seen.insert(c.center);
}

QuorumClustering run(const PointSet& ps, const std::vector<double>& w, double target, bool weighted,
                     QuorumMethod method) {
  const Eigen::Index n = ps.size();
  QuorumClustering out;
  out.weighted = weighted;
  std::vector<char> alive(n, 1);
  std::set<Vector, CenterKey> seen;
  std::vector<Hit> members;

  auto remaining_weight = [&] {
    double s = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (alive[j]) s += w[j];
    return s;
  };
  auto emit = [&](Eigen::Index p, double rho) {
    Cluster c;
    c.center = ps.point(p);
    c.rho = rho;
    for (const auto& h : members) {
      c.members.push_back(h.idx);
      c.weight += w[h.idx];
      c.radius = std::max(c.radius, h.dist);
      alive[h.idx] = 0;
    }
    make_distinct(c, seen);
    out.balls.push_back(std::move(c));
  };

  if (method == QuorumMethod::Reference) {
    while (remaining_weight() >= target && std::count(alive.begin(), alive.end(), 1) > 0) {
      double best = HUGE_VAL;
      Eigen::Index arg = -1;
      for (Eigen::Index p = 0; p < n; ++p) {
        if (!alive[p]) continue;
        const double v = reference_kth(ps, w, alive, p, target, nullptr);
        if (v < best) {
          best = v;
          arg = p;
        }
      }
      reference_kth(ps, w, alive, arg, target, &members);
      emit(arg, best);
    }
  } else {
    LiveGrid grid(ps, w);
    using Key = std::pair<double, Eigen::Index>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> pq;
    std::vector<double> key(n);
    for (Eigen::Index p = 0; p < n; ++p) {
      key[p] = grid.kth(p, target, 0.0, nullptr);
      pq.push({key[p], p});
    }
    while (remaining_weight() >= target && !pq.empty()) {
      auto [kv, p] = pq.top();
      pq.pop();
      if (!alive[p] || kv != key[p]) continue;
      // keys only grow as points leave, so a stored key is a lower bound
      const double now = grid.kth(p, target, kv, &members);
      while (!pq.empty() && (!alive[pq.top().second] || pq.top().first != key[pq.top().second])) pq.pop();
      if (pq.empty() || now <= pq.top().first) {
        for (const auto& h : members) grid.remove(h.idx);
        emit(p, now);
      } else {
        key[p] = now;
        pq.push({now, p});
      }
    }
  }

  // weighted leftovers: top up with a pad point at the synthetic location
  std::vector<Eigen::Index> rest;
  for (Eigen::Index j = 0; j < n; ++j)
    if (alive[j]) rest.push_back(j);
  if (!rest.empty()) {
    if (!weighted) throw ContractViolation("quorum: leftover points in unweighted clustering");
    out.pad_index = n;
    out.pad_weight = target - remaining_weight();
    Cluster c;
    c.center = Vector::Constant(ps.dim(), kSyntheticCoord);
    c.members = rest;
    c.members.push_back(n);
    c.weight = target;
    for (auto j : rest) c.radius = std::max(c.radius, (ps.point(j) - c.center).norm());
    c.rho = c.radius;
    make_distinct(c, seen);
    out.balls.push_back(std::move(c));
  }
  return out;
}

}  // namespace

QuorumClustering quorum_cluster(const PointSet& ps, long k, QuorumMethod method) {
  if (k < 1 || k > ps.size()) throw InvalidArgument("quorum_cluster: k out of range");
  if (ps.size() % k != 0) throw InvalidArgument("quorum_cluster: point count is not a multiple of k");
  std::vector<double> w(ps.size(), 1.0);
  auto qc = run(ps, w, static_cast<double>(k), false, method);
  qc.k = k;
  qc.tau = static_cast<double>(k);
  return qc;
}

QuorumClustering quorum_cluster_weighted(const PointSet& ps, double tau, QuorumMethod method) {
  if (!(tau > 0)) throw InvalidArgument("quorum_cluster_weighted: tau must be positive");
  if (tau > ps.total_weight()) throw InvalidArgument("quorum_cluster_weighted: tau exceeds total weight");
  std::vector<double> w(ps.weights().data(), ps.weights().data() + ps.size());
  auto qc = run(ps, w, tau, true, method);
  qc.tau = tau;
  return qc;
}

void write_clustering_csv(std::ostream& out, const QuorumClustering& qc) {
  const auto prec = out.precision(17);
  out << "round";
  if (!qc.balls.empty())
    for (Eigen::Index i = 0; i < qc.balls[0].center.size(); ++i) out << ",c" << i;
  out << ",radius,members\n";
  for (std::size_t r = 0; r < qc.balls.size(); ++r) {
    const auto& b = qc.balls[r];
    out << r;
    for (Eigen::Index i = 0; i < b.center.size(); ++i) out << ',' << b.center(i);
    out << ',' << b.radius << ',';
    for (std::size_t j = 0; j < b.members.size(); ++j) out << (j ? ";" : "") << b.members[j];
    out << '\n';
  }
  out.precision(prec);
}

std::vector<std::string> audit_clustering(const PointSet& ps, const QuorumClustering& qc) {
  std::vector<std::string> bad;
  std::vector<int> seen(ps.size() + 1, 0);
  std::set<Vector, CenterKey> centers;
  for (std::size_t r = 0; r < qc.balls.size(); ++r) {
    const auto& b = qc.balls[r];
    const std::string tag = "round " + std::to_string(r) + ": ";
    if (!centers.insert(b.center).second) bad.push_back(tag + "duplicate center");
    double wsum = 0;
    for (auto j : b.members) {
      if (j == qc.pad_index) {
        ++seen[ps.size()];
        wsum += qc.pad_weight;
        continue;
      }
      if (j < 0 || j >= ps.size()) {
        bad.push_back(tag + "member out of range");
        continue;
      }
      ++seen[j];
      wsum += qc.weighted ? ps.weight(j) : 1.0;
      if ((ps.point(j) - b.center).norm() > b.radius) bad.push_back(tag + "member outside ball");
    }
    if (!qc.weighted && static_cast<long>(b.members.size()) != qc.k) bad.push_back(tag + "wrong member count");
    if (qc.weighted && wsum < qc.tau * (1 - 1e-12)) bad.push_back(tag + "weight below tau");
  }
  for (Eigen::Index j = 0; j < ps.size(); ++j)
    if (seen[j] != 1) bad.push_back("point " + std::to_string(j) + " covered " + std::to_string(seen[j]) + " times");
  if (qc.pad_index >= 0 && seen[ps.size()] != 1) bad.push_back("pad point misplaced");
  return bad;
}

}  // namespace prox
