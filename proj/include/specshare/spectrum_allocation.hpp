#pragma once

#include <boost/container/small_vector.hpp>

#include <initializer_list>
#include <span>
#include <string>

namespace specshare {

/// Half-open frequency interval [lo, hi) in MHz.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double f) const noexcept { return lo <= f && f < hi; }
  bool operator==(const Interval&) const = default;
};

/// Rounds a frequency to the 1 Hz lattice every allocation endpoint lives on.
/// Endpoints built from the same arithmetic therefore compare bit-exactly.
double quantize_mhz(double f) noexcept;

/// Support of an on-off flat PSD: a sorted list of pairwise disjoint
/// half-open intervals (touching intervals are allowed and kept as given).
class SpectrumAllocation {
 public:
  using Storage = boost::container::small_vector<Interval, 2>;

  SpectrumAllocation() = default;

  /// Validates ordering, disjointness, lo < hi and 0 <= lo, hi <= band_mhz.
  /// Throws DomainError on violation.
  SpectrumAllocation(std::initializer_list<Interval> intervals, double band_mhz);
  SpectrumAllocation(std::span<const Interval> intervals, double band_mhz);

  /// Single block [lo, hi); an empty allocation when lo == hi.
  static SpectrumAllocation block(double lo, double hi, double band_mhz);
  static SpectrumAllocation full_band(double band_mhz);

  std::span<const Interval> intervals() const noexcept { return {intervals_.data(), intervals_.size()}; }
  bool empty() const noexcept { return intervals_.empty(); }
  double width() const noexcept;
  bool covers(double f) const noexcept;

  /// Same support as `other`: adjacent intervals are merged before comparing,
  /// endpoints are compared exactly.
  bool same_support(const SpectrumAllocation& other) const;

  /// Structural equality (same interval list).
  bool operator==(const SpectrumAllocation&) const = default;

  std::string to_string() const;

 private:
  Storage intervals_;
};

}  // namespace specshare
