#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace topspec {

inline constexpr int kMaxDim = 4;

/// A point of Z^d, 1 <= d <= kMaxDim. Ordered lexicographically.
class Site {
 public:
  Site() = default;
  Site(std::initializer_list<int> coords);
  explicit Site(std::span<const int> coords);
  /// The origin of Z^d.
  static Site origin(int dim);

  int dim() const noexcept { return dim_; }
  int operator[](int axis) const noexcept { return c_[static_cast<std::size_t>(axis)]; }
  int& operator[](int axis) noexcept { return c_[static_cast<std::size_t>(axis)]; }

  /// Neighbour in direction `dir` in [0, 2d): axis dir/2, step -1 for even dir and +1 for odd.
  Site neighbor(int dir) const noexcept;

  friend bool operator==(const Site& a, const Site& b) noexcept;
  friend std::strong_ordering operator<=>(const Site& a, const Site& b) noexcept;

 private:
  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept;
};

int l1_distance(const Site& a, const Site& b) noexcept;

/// Finite subset of Z^d with nearest-neighbour adjacency. Immutable after construction.
///
/// Sites are kept sorted lexicographically without duplicates; that order is the
/// basis order of every vector and matrix built over the domain.
class LatticeDomain {
 public:
  static constexpr std::int32_t kNone = -1;

  LatticeDomain() = default;
  explicit LatticeDomain(int dim);
  LatticeDomain(int dim, std::vector<Site> sites);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  const std::vector<Site>& sites() const noexcept { return sites_; }
  const Site& operator[](std::size_t i) const noexcept { return sites_[i]; }
  auto begin() const noexcept { return sites_.begin(); }
  auto end() const noexcept { return sites_.end(); }

  bool contains(const Site& s) const;
  std::optional<std::size_t> index_of(const Site& s) const;

  /// Index of the neighbour of site i in direction dir, or kNone if it lies outside.
  std::int32_t neighbor(std::size_t i, int dir) const noexcept {
    return nbr_[i * static_cast<std::size_t>(2 * dim_) + static_cast<std::size_t>(dir)];
  }
  int degree(std::size_t i) const noexcept;

  bool is_subset_of(const LatticeDomain& other) const;
  /// Largest l1 distance between two sites (0 for fewer than two sites).
  int diameter() const;

  friend bool operator==(const LatticeDomain& a, const LatticeDomain& b) {
    return a.dim_ == b.dim_ && a.sites_ == b.sites_;
  }

 private:
  void build_index();

  int dim_ = 0;
  std::vector<Site> sites_;
  std::unordered_map<Site, std::int32_t, SiteHash> index_;
  std::vector<std::int32_t> nbr_;
};

/// Bounded open subset of R^d: an open box, an open Euclidean ball, or a union of open boxes.
struct ContinuumShape {
  enum class Kind { box, ball, union_of_boxes };

  struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
  };

  Kind kind = Kind::box;
  int dim = 1;
  std::vector<Box> boxes;      // box: exactly one; union_of_boxes: one or more
  std::vector<double> center;  // ball
  double radius = 0.0;         // ball

  static ContinuumShape unit_box(int dim);
  static ContinuumShape box(std::vector<double> lo, std::vector<double> hi);
  static ContinuumShape ball(std::vector<double> center, double radius);
  static ContinuumShape union_of(std::vector<Box> boxes);

  bool contains(std::span<const double> point) const;
  /// Axis-aligned bounding box [lo, hi].
  Box bounds() const;
  /// Lebesgue volume.
  double volume() const;
  /// Throws DomainError when bounded/open/nonempty fails.
  void validate() const;
};

/// {x in Z^d : x/L in shape}, lexicographically ordered. Throws DomainError when empty.
LatticeDomain scale_domain(const ContinuumShape& shape, int L);

/// l1 ball of radius R around `center`, optionally intersected with `within`.
LatticeDomain ball(const Site& center, int R, const LatticeDomain* within);
/// l1 ball of radius R around `center` with the full lattice Z^d.
inline LatticeDomain ball(const Site& center, int R) { return ball(center, R, nullptr); }

/// Axis-aligned box lo <= x <= hi (inclusive corners).
LatticeDomain lattice_box(const Site& lo, const Site& hi);

/// Maximal nearest-neighbour connected pieces, ordered by their smallest site.
std::vector<LatticeDomain> connected_components(const LatticeDomain& U);

/// Vertices of Z^d outside V having an edge into V.
LatticeDomain boundary(const LatticeDomain& V);

/// Sites of `a` that are not in `b`.
LatticeDomain set_difference(const LatticeDomain& a, const LatticeDomain& b);
LatticeDomain set_union(const LatticeDomain& a, const LatticeDomain& b);

/// l1 distance from s to the nearest site of V (V nonempty).
int l1_distance(const Site& s, const LatticeDomain& V);

}  // namespace topspec
