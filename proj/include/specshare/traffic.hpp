#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace specshare {

struct TrafficLevel {
  double level = 0.0;
  double probability = 0.0;
};

/// Per-operator i.i.d. traffic-intensity distribution with finite support.
class TrafficSpec {
 public:
  /// Lambda = 1 with probability p_high, else 0.
  static TrafficSpec two_level(double p_high);
  /// Arbitrary finite support; levels non-negative and distinct,
  /// probabilities in [0, 1] summing to 1 within 1e-12.
  static TrafficSpec finite_levels(std::vector<TrafficLevel> support);

  std::span<const TrafficLevel> support() const noexcept { return support_; }
  /// Support contained in {0, 1}.
  bool is_two_level() const noexcept;
  /// P(Lambda = 1); only meaningful when is_two_level().
  double p_high() const noexcept;
  double max_level() const noexcept;
  bool in_support(double level) const noexcept;

 private:
  explicit TrafficSpec(std::vector<TrafficLevel> support);
  std::vector<TrafficLevel> support_;
};

/// Counter-based 64-bit mixer: a pure function of (seed, stream, counter).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept;

/// Seed of replication r derived from a base seed.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication) noexcept;

/// Traffic level of `op` in `slot`; deterministic in (seed, op, slot).
double sample(const TrafficSpec& spec, std::uint64_t slot, std::uint64_t op, std::uint64_t seed);

/// Sum over the support of p(lambda) * g(lambda).
double expectation(const TrafficSpec& spec, const std::function<double(double)>& g);

/// Joint distribution of two binary traffic processes, indexed [lambda1][lambda2].
/// Defaults to the product of the marginals; the verifier accepts overrides.
struct JointTraffic2 {
  std::array<std::array<double, 2>, 2> p{};

  static JointTraffic2 product(const TrafficSpec& op1, const TrafficSpec& op2);
  /// Explicit joint table; entries non-negative and summing to 1.
  static JointTraffic2 from_table(double p00, double p01, double p10, double p11);

  double p01() const noexcept { return p[0][1]; }
  double p10() const noexcept { return p[1][0]; }
  double marginal_high(int op) const noexcept;
};

}  // namespace specshare
