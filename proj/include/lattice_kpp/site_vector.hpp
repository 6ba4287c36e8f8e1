#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace lkpp {

using Site = std::int64_t;

constexpr bool is_even(Site i) { return (i % 2) == 0; }

// Closed integer interval [lo, hi] of lattice sites.
struct SiteRange {
  Site lo = 0;
  Site hi = 0;

  std::size_t size() const { return hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0; }
  bool contains(Site i) const { return i >= lo && i <= hi; }
  bool contains(const SiteRange& r) const { return r.lo >= lo && r.hi <= hi; }
  friend bool operator==(const SiteRange&, const SiteRange&) = default;
};

// Values on a contiguous window of sites; sites outside the window read as 0.
class SiteVector {
public:
  SiteVector() = default;
  SiteVector(SiteRange range, double fill = 0.0)
      : range_(range), values_(range.size(), fill) {
    if (range.hi < range.lo) throw std::invalid_argument("SiteVector: empty range");
  }
  SiteVector(Site first, std::vector<double> values)
      : range_{first, first + static_cast<Site>(values.size()) - 1}, values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("SiteVector: empty values");
  }

  const SiteRange& range() const { return range_; }
  Site first() const { return range_.lo; }
  Site last() const { return range_.hi; }
  std::size_t size() const { return values_.size(); }

  double operator[](Site i) const { return values_[static_cast<std::size_t>(i - range_.lo)]; }
  double& operator[](Site i) { return values_[static_cast<std::size_t>(i - range_.lo)]; }
  double at_or_zero(Site i) const { return range_.contains(i) ? (*this)[i] : 0.0; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

private:
  SiteRange range_{};
  std::vector<double> values_;
};

}  // namespace lkpp
