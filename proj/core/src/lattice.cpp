#include "topspec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "topspec/error.hpp"
#include "topspec/union_find.hpp"

namespace topspec {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw DomainError("lattice dimension must lie in [1, " + std::to_string(kMaxDim) + "], got " +
                      std::to_string(dim));
}

}  // namespace

Site::Site(std::initializer_list<int> coords)
    : Site(std::span<const int>(coords.begin(), coords.size())) {}

Site::Site(std::span<const int> coords) : dim_(static_cast<int>(coords.size())) {
  check_dim(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Site Site::origin(int dim) {
  check_dim(dim);
  Site s;
  s.dim_ = dim;
  return s;
}

Site Site::neighbor(int dir) const noexcept {
  Site s = *this;
  s.c_[static_cast<std::size_t>(dir / 2)] += (dir % 2 == 0) ? -1 : 1;
  return s;
}

bool operator==(const Site& a, const Site& b) noexcept {
  if (a.dim_ != b.dim_) return false;
  for (int i = 0; i < a.dim_; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

std::strong_ordering operator<=>(const Site& a, const Site& b) noexcept {
  if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
  for (int i = 0; i < a.dim_; ++i)
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(s[i])) + 0x9e3779b97f4a7c15ULL +
         (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

int l1_distance(const Site& a, const Site& b) noexcept {
  int d = 0;
  for (int i = 0; i < a.dim(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

LatticeDomain::LatticeDomain(int dim) : dim_(dim) { check_dim(dim); }

LatticeDomain::LatticeDomain(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites)) {
  check_dim(dim);
  for (const auto& s : sites_)
    if (s.dim() != dim) throw DomainError("site dimension does not match domain dimension");
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  if (sites_.size() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
    throw DomainError("domain too large");
  build_index();
}

void LatticeDomain::build_index() {
  index_.reserve(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) index_.emplace(sites_[i], static_cast<std::int32_t>(i));
  const int nd = 2 * dim_;
  nbr_.assign(sites_.size() * static_cast<std::size_t>(nd), kNone);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    for (int dir = 0; dir < nd; ++dir) {
      auto it = index_.find(sites_[i].neighbor(dir));
      if (it != index_.end()) nbr_[i * static_cast<std::size_t>(nd) + static_cast<std::size_t>(dir)] = it->second;
    }
  }
}

bool LatticeDomain::contains(const Site& s) const { return index_.find(s) != index_.end(); }

std::optional<std::size_t> LatticeDomain::index_of(const Site& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return static_cast<std::size_t>(it->second);
}

int LatticeDomain::degree(std::size_t i) const noexcept {
  int deg = 0;
  for (int dir = 0; dir < 2 * dim_; ++dir) deg += neighbor(i, dir) != kNone;
  return deg;
}

bool LatticeDomain::is_subset_of(const LatticeDomain& other) const {
  if (empty()) return true;
  if (dim_ != other.dim_) return false;
  return std::all_of(sites_.begin(), sites_.end(), [&](const Site& s) { return other.contains(s); });
}

int LatticeDomain::diameter() const {
  if (sites_.size() < 2) return 0;
  // l1 diameter via the 2^(d-1) rotated coordinates: max over sign patterns of (max - min).
  int best = 0;
  const int patterns = 1 << (dim_ - 1);
  for (int p = 0; p < patterns; ++p) {
    long lo = std::numeric_limits<long>::max(), hi = std::numeric_limits<long>::min();
    for (const auto& s : sites_) {
      long v = s[0];
      for (int a = 1; a < dim_; ++a) v += ((p >> (a - 1)) & 1) ? -s[a] : s[a];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    best = std::max(best, static_cast<int>(hi - lo));
  }
  return best;
}

ContinuumShape ContinuumShape::unit_box(int dim) {
  return box(std::vector<double>(static_cast<std::size_t>(dim), 0.0),
             std::vector<double>(static_cast<std::size_t>(dim), 1.0));
}

ContinuumShape ContinuumShape::box(std::vector<double> lo, std::vector<double> hi) {
  ContinuumShape s;
  s.kind = Kind::box;
  s.dim = static_cast<int>(lo.size());
  s.boxes.push_back({std::move(lo), std::move(hi)});
  s.validate();
  return s;
}

ContinuumShape ContinuumShape::ball(std::vector<double> center, double radius) {
  ContinuumShape s;
  s.kind = Kind::ball;
  s.dim = static_cast<int>(center.size());
  s.center = std::move(center);
  s.radius = radius;
  s.validate();
  return s;
}

ContinuumShape ContinuumShape::union_of(std::vector<Box> boxes) {
  ContinuumShape s;
  s.kind = Kind::union_of_boxes;
  s.dim = boxes.empty() ? 0 : static_cast<int>(boxes.front().lo.size());
  s.boxes = std::move(boxes);
  s.validate();
  return s;
}

void ContinuumShape::validate() const {
  check_dim(dim);
  auto finite = [](double v) { return std::isfinite(v); };
  if (kind == Kind::ball) {
    if (static_cast<int>(center.size()) != dim || !std::all_of(center.begin(), center.end(), finite) ||
        !(radius > 0.0) || !std::isfinite(radius))
      throw DomainError("ball shape needs a finite center and a positive finite radius");
    return;
  }
  if (boxes.empty() || (kind == Kind::box && boxes.size() != 1))
    throw DomainError("box shape needs exactly one box; union needs at least one");
  for (const auto& b : boxes) {
    if (static_cast<int>(b.lo.size()) != dim || static_cast<int>(b.hi.size()) != dim)
      throw DomainError("box corner dimension mismatch");
    for (int a = 0; a < dim; ++a) {
      const auto i = static_cast<std::size_t>(a);
      if (!finite(b.lo[i]) || !finite(b.hi[i]) || !(b.lo[i] < b.hi[i]))
        throw DomainError("box needs finite corners with lo < hi on every axis");
    }
  }
}

bool ContinuumShape::contains(std::span<const double> p) const {
  if (kind == Kind::ball) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double t = p[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)];
      r2 += t * t;
    }
    return r2 < radius * radius;
  }
  for (const auto& b : boxes) {
    bool in = true;
    for (int a = 0; a < dim && in; ++a) {
      const auto i = static_cast<std::size_t>(a);
      in = p[i] > b.lo[i] && p[i] < b.hi[i];
    }
    if (in) return true;
  }
  return false;
}

ContinuumShape::Box ContinuumShape::bounds() const {
  const auto n = static_cast<std::size_t>(dim);
  Box out{std::vector<double>(n), std::vector<double>(n)};
  if (kind == Kind::ball) {
    for (std::size_t a = 0; a < n; ++a) {
      out.lo[a] = center[a] - radius;
      out.hi[a] = center[a] + radius;
    }
    return out;
  }
  out = boxes.front();
  for (const auto& b : boxes)
    for (std::size_t a = 0; a < n; ++a) {
      out.lo[a] = std::min(out.lo[a], b.lo[a]);
      out.hi[a] = std::max(out.hi[a], b.hi[a]);
    }
  return out;
}

double ContinuumShape::volume() const {
  if (kind == Kind::ball) {
    // V_d(r) = pi^{d/2} r^d / Gamma(d/2 + 1)
    return std::pow(M_PI, dim / 2.0) * std::pow(radius, dim) / std::tgamma(dim / 2.0 + 1.0);
  }
  if (boxes.size() == 1) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= boxes[0].hi[static_cast<std::size_t>(a)] - boxes[0].lo[static_cast<std::size_t>(a)];
    return v;
  }
  // Union of boxes: coordinate compression over the grid of all box faces.
  const auto n = static_cast<std::size_t>(dim);
  std::vector<std::vector<double>> cuts(n);
  for (const auto& b : boxes)
    for (std::size_t a = 0; a < n; ++a) {
      cuts[a].push_back(b.lo[a]);
      cuts[a].push_back(b.hi[a]);
    }
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::vector<std::size_t> idx(n, 0);
  double total = 0.0;
  std::vector<double> mid(n);
  while (true) {
    double cell = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
      mid[a] = 0.5 * (cuts[a][idx[a]] + cuts[a][idx[a] + 1]);
      cell *= cuts[a][idx[a] + 1] - cuts[a][idx[a]];
    }
    if (contains(mid)) total += cell;
    std::size_t a = 0;
    for (; a < n; ++a) {
      if (++idx[a] + 1 < cuts[a].size()) break;
      idx[a] = 0;
    }
    if (a == n) break;
  }
  return total;
}

LatticeDomain scale_domain(const ContinuumShape& shape, int L) {
  if (L < 1) throw PreconditionError("scale_domain: L must be >= 1");
  shape.validate();
  const auto bb = shape.bounds();
  const int d = shape.dim;
  std::array<long, kMaxDim> lo{}, hi{};
  for (int a = 0; a < d; ++a) {
    lo[static_cast<std::size_t>(a)] = static_cast<long>(std::floor(bb.lo[static_cast<std::size_t>(a)] * L));
    hi[static_cast<std::size_t>(a)] = static_cast<long>(std::ceil(bb.hi[static_cast<std::size_t>(a)] * L));
  }
  std::vector<Site> sites;
  Site x = Site::origin(d);
  std::vector<double> p(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) x[a] = static_cast<int>(lo[static_cast<std::size_t>(a)]);
  while (true) {
    for (int a = 0; a < d; ++a) p[static_cast<std::size_t>(a)] = static_cast<double>(x[a]) / L;
    if (shape.contains(p)) sites.push_back(x);
    int a = 0;
    for (; a < d; ++a) {
      if (++x[a] <= hi[static_cast<std::size_t>(a)]) break;
      x[a] = static_cast<int>(lo[static_cast<std::size_t>(a)]);
    }
    if (a == d) break;
  }
  if (sites.empty()) throw DomainError("degenerate domain");
  return LatticeDomain(d, std::move(sites));
}

LatticeDomain ball(const Site& center, int R, const LatticeDomain* within) {
  if (R < 0) throw PreconditionError("ball: radius must be nonnegative");
  const int d = center.dim();
  std::vector<Site> sites;
  Site off = Site::origin(d);
  for (int a = 0; a < d; ++a) off[a] = -R;
  while (true) {
    int norm = 0;
    for (int a = 0; a < d; ++a) norm += std::abs(off[a]);
    if (norm <= R) {
      Site s = center;
      for (int a = 0; a < d; ++a) s[a] += off[a];
      if (within == nullptr || within->contains(s)) sites.push_back(s);
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++off[a] <= R) break;
      off[a] = -R;
    }
    if (a == d) break;
  }
  return LatticeDomain(d, std::move(sites));
}

LatticeDomain lattice_box(const Site& lo, const Site& hi) {
  const int d = lo.dim();
  std::vector<Site> sites;
  for (int a = 0; a < d; ++a)
    if (hi[a] < lo[a]) return LatticeDomain(d);
  Site x = lo;
  while (true) {
    sites.push_back(x);
    int a = 0;
    for (; a < d; ++a) {
      if (++x[a] <= hi[a]) break;
      x[a] = lo[a];
    }
    if (a == d) break;
  }
  return LatticeDomain(d, std::move(sites));
}

std::vector<LatticeDomain> connected_components(const LatticeDomain& U) {
  std::vector<LatticeDomain> out;
  if (U.empty()) return out;
  UnionFind uf(U.size());
  const int nd = 2 * U.dim();
  for (std::size_t i = 0; i < U.size(); ++i)
    for (int dir = 1; dir < nd; dir += 2)  // +1 steps suffice for an undirected graph
      if (auto j = U.neighbor(i, dir); j != LatticeDomain::kNone)
        uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  std::unordered_map<std::uint32_t, std::size_t> slot;
  std::vector<std::vector<Site>> parts;
  for (std::size_t i = 0; i < U.size(); ++i) {
    const auto r = uf.find(static_cast<std::uint32_t>(i));
    auto [it, fresh] = slot.emplace(r, parts.size());
    if (fresh) parts.emplace_back();
    parts[it->second].push_back(U[i]);
  }
  out.reserve(parts.size());
  for (auto& p : parts) out.emplace_back(U.dim(), std::move(p));
  return out;
}

LatticeDomain boundary(const LatticeDomain& V) {
  if (V.empty()) return LatticeDomain(V.dim() == 0 ? 1 : V.dim());
  std::vector<Site> out;
  for (std::size_t i = 0; i < V.size(); ++i)
    for (int dir = 0; dir < 2 * V.dim(); ++dir)
      if (V.neighbor(i, dir) == LatticeDomain::kNone) out.push_back(V[i].neighbor(dir));
  return LatticeDomain(V.dim(), std::move(out));
}

LatticeDomain set_difference(const LatticeDomain& a, const LatticeDomain& b) {
  std::vector<Site> out;
  for (const auto& s : a)
    if (!b.contains(s)) out.push_back(s);
  return LatticeDomain(a.dim(), std::move(out));
}

LatticeDomain set_union(const LatticeDomain& a, const LatticeDomain& b) {
  std::vector<Site> out(a.sites());
  out.insert(out.end(), b.begin(), b.end());
  return LatticeDomain(a.empty() ? b.dim() : a.dim(), std::move(out));
}

int l1_distance(const Site& s, const LatticeDomain& V) {
  int best = std::numeric_limits<int>::max();
  for (const auto& v : V) best = std::min(best, l1_distance(s, v));
  return best;
}

}  // namespace topspec
