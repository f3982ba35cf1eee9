#include "specshare/spectrum_allocation.hpp"

#include "specshare/errors.hpp"

#include <cmath>
#include <sstream>

namespace specshare {

double quantize_mhz(double f) noexcept { return std::round(f * 1e6) / 1e6; }

namespace {

SpectrumAllocation::Storage merged(std::span<const Interval> in) {
  SpectrumAllocation::Storage out;
  for (const auto& iv : in) {
    if (!out.empty() && out.back().hi == iv.lo) {
      out.back().hi = iv.hi;
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

}  // namespace

SpectrumAllocation::SpectrumAllocation(std::initializer_list<Interval> intervals, double band_mhz)
    : SpectrumAllocation(std::span<const Interval>(intervals.begin(), intervals.size()), band_mhz) {}

SpectrumAllocation::SpectrumAllocation(std::span<const Interval> intervals, double band_mhz) {
  double prev_hi = 0.0;
  for (const auto& iv : intervals) {
    if (!(iv.lo < iv.hi)) throw DomainError("interval must satisfy lo < hi");
    if (iv.lo < prev_hi) throw DomainError("intervals must be sorted and pairwise disjoint");
    if (iv.hi > band_mhz) throw DomainError("interval exceeds the band");
    prev_hi = iv.hi;
    intervals_.push_back(iv);
  }
  if (!intervals_.empty() && intervals_.front().lo < 0.0) {
    throw DomainError("interval starts below 0");
  }
}

SpectrumAllocation SpectrumAllocation::block(double lo, double hi, double band_mhz) {
  if (hi < lo) throw DomainError("block must satisfy lo <= hi");
  if (lo == hi) return {};
  return SpectrumAllocation({Interval{lo, hi}}, band_mhz);
}

SpectrumAllocation SpectrumAllocation::full_band(double band_mhz) {
  return block(0.0, band_mhz, band_mhz);
}

double SpectrumAllocation::width() const noexcept {
  double total = 0.0;
  for (const auto& iv : intervals_) total += iv.width();
  return total;
}

bool SpectrumAllocation::covers(double f) const noexcept {
  for (const auto& iv : intervals_) {
    if (iv.contains(f)) return true;
    if (f < iv.lo) break;
  }
  return false;
}

bool SpectrumAllocation::same_support(const SpectrumAllocation& other) const {
  auto a = merged(intervals());
  auto b = merged(other.intervals());
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

std::string SpectrumAllocation::to_string() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << '{';
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (i) os << ' ';
    os << '[' << intervals_[i].lo << ',' << intervals_[i].hi << ')';
  }
  os << '}';
  return os.str();
}

}  // namespace specshare
