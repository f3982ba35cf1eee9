#include "specshare/traffic.hpp"

#include "specshare/errors.hpp"

#include <algorithm>
#include <cmath>

namespace specshare {

TrafficSpec::TrafficSpec(std::vector<TrafficLevel> support) : support_(std::move(support)) {}

TrafficSpec TrafficSpec::two_level(double p_high) {
  if (!(p_high >= 0.0 && p_high <= 1.0)) throw ContractViolation("p_high must lie in [0, 1]");
  return TrafficSpec({{0.0, 1.0 - p_high}, {1.0, p_high}});
}

TrafficSpec TrafficSpec::finite_levels(std::vector<TrafficLevel> support) {
  if (support.empty()) throw ContractViolation("traffic support must be non-empty");
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto& s = support[i];
    if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
      throw ContractViolation("traffic probabilities must lie in [0, 1]");
    }
    if (!(s.level >= 0.0)) throw ContractViolation("traffic levels must be non-negative");
    for (std::size_t j = 0; j < i; ++j) {
      if (support[j].level == s.level) throw ContractViolation("traffic levels must be distinct");
    }
    total += s.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ContractViolation("traffic probabilities must sum to 1");
  std::sort(support.begin(), support.end(),
            [](const TrafficLevel& a, const TrafficLevel& b) { return a.level < b.level; });
  return TrafficSpec(std::move(support));
}

bool TrafficSpec::is_two_level() const noexcept {
  return std::all_of(support_.begin(), support_.end(),
                     [](const TrafficLevel& s) { return s.level == 0.0 || s.level == 1.0; });
}

double TrafficSpec::p_high() const noexcept {
  for (const auto& s : support_) {
    if (s.level == 1.0) return s.probability;
  }
  return 0.0;
}

double TrafficSpec::max_level() const noexcept {
  double m = 0.0;
  for (const auto& s : support_) {
    if (s.probability > 0.0) m = std::max(m, s.level);
  }
  return m;
}

bool TrafficSpec::in_support(double level) const noexcept {
  return std::any_of(support_.begin(), support_.end(),
                     [&](const TrafficLevel& s) { return s.level == level; });
}

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (counter * 0x8cb92ba72f3d8dd7ULL + 0xa0761d6478bd642fULL));
  return h;
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  return static_cast<double>(counter_hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication) noexcept {
  return mix64(mix64(seed) ^ mix64(replication + 0x5851f42d4c957f2dULL));
}

double sample(const TrafficSpec& spec, std::uint64_t slot, std::uint64_t op, std::uint64_t seed) {
  const double u = counter_uniform(seed, op, slot);
  const auto support = spec.support();
  double cumulative = 0.0;
  for (const auto& s : support) {
    cumulative += s.probability;
    if (u < cumulative) return s.level;
  }
  // u landed in the rounding gap above the last cumulative sum.
  for (auto it = support.rbegin(); it != support.rend(); ++it) {
    if (it->probability > 0.0) return it->level;
  }
  return support.back().level;
}

double expectation(const TrafficSpec& spec, const std::function<double(double)>& g) {
  double total = 0.0;
  for (const auto& s : spec.support()) {
    if (s.probability > 0.0) total += s.probability * g(s.level);
  }
  return total;
}

JointTraffic2 JointTraffic2::product(const TrafficSpec& op1, const TrafficSpec& op2) {
  if (!op1.is_two_level() || !op2.is_two_level()) throw DomainError("joint table needs binary traffic");
  const double h1 = op1.p_high();
  const double h2 = op2.p_high();
  JointTraffic2 j;
  j.p[0][0] = (1 - h1) * (1 - h2);
  j.p[0][1] = (1 - h1) * h2;
  j.p[1][0] = h1 * (1 - h2);
  j.p[1][1] = h1 * h2;
  return j;
}

JointTraffic2 JointTraffic2::from_table(double p00, double p01, double p10, double p11) {
  for (double v : {p00, p01, p10, p11}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation("joint probabilities must lie in [0, 1]");
  }
  if (std::abs(p00 + p01 + p10 + p11 - 1.0) > 1e-12) {
    throw ContractViolation("joint probabilities must sum to 1");
  }
  JointTraffic2 j;
  j.p[0][0] = p00;
  j.p[0][1] = p01;
  j.p[1][0] = p10;
  j.p[1][1] = p11;
  return j;
}

double JointTraffic2::marginal_high(int op) const noexcept {
  return op == 0 ? p[1][0] + p[1][1] : p[0][1] + p[1][1];
}

}  // namespace specshare
