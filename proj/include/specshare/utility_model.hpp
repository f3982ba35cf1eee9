#pragma once

#include "specshare/spectrum_allocation.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace specshare {

/// r(gamma) = log2(1 + gamma).
struct ShannonRate {};

/// Custom monotone rate table, piecewise linear in gamma with linear
/// extrapolation past the last knot. Knots must start at gamma = 0.
struct TabulatedRate {
  std::vector<double> gamma;
  std::vector<double> rate;
};

using RateFunction = std::variant<ShannonRate, TabulatedRate>;

/// pi(x, lambda) = lambda * r(P) * x.
struct LinearUtility {};

/// pi(x, lambda) = (a*lambda + 1)^s * (r(P) * x)^e.
struct CobbDouglasUtility {
  double a = 24.0;
  double s = 0.5;
  double e = 0.9;
};

/// Arbitrary pi(x, lambda) where x is the effective bandwidth in MHz.
struct CustomUtility {
  std::string name;
  std::function<double(double x, double lambda)> fn;
};

using UtilityFamily = std::variant<LinearUtility, CobbDouglasUtility, CustomUtility>;

/// Exclusive-bandwidth equivalent of an interfered allocation, in MHz.
struct EffectiveBandwidth {
  double value = 0.0;
};

/// Band, power cap, rate function and utility family. Immutable after
/// construction; every evaluation is a pure function of the arguments.
class UtilityModel {
 public:
  UtilityModel(double band_mhz, double power_cap, RateFunction rate, UtilityFamily family);

  static UtilityModel linear(double band_mhz, double power_cap);
  static UtilityModel cobb_douglas(double band_mhz, double power_cap, CobbDouglasUtility params = {});

  double band() const noexcept { return band_mhz_; }
  double power_cap() const noexcept { return power_cap_; }
  const RateFunction& rate_function() const noexcept { return rate_; }
  const UtilityFamily& family() const noexcept { return family_; }
  bool is_shannon() const noexcept { return std::holds_alternative<ShannonRate>(rate_); }

  /// Usefulness per Hz at SINR gamma. Throws DomainError for gamma < 0.
  double rate(double gamma) const;
  double rate_at_cap() const noexcept { return rate_at_cap_; }

  /// pi(x, lambda) with x the effective exclusive bandwidth in MHz.
  double pi(double x, double lambda) const;

  /// Effective bandwidth each of n operators gets when all transmit at the
  /// cap over the whole band.
  double full_spectrum_bandwidth(int n) const;

  /// U-bar(lambda): best one-slot utility, i.e. exclusive use of the band.
  double upper_utility(double lambda) const { return pi(band_mhz_, lambda); }

  std::string describe() const;

 private:
  double band_mhz_;
  double power_cap_;
  RateFunction rate_;
  UtilityFamily family_;
  double rate_at_cap_;
};

/// SINR of `op` at frequency f given the other operators' supports.
/// Throws DomainError when f is outside [0, W).
double sinr(const SpectrumAllocation& op, std::span<const SpectrumAllocation> others, double f,
            const UtilityModel& model);

/// Exact effective bandwidth: the op's support is cut at every interferer
/// endpoint and each piece contributes width * r(gamma) / r(P).
EffectiveBandwidth effective_bandwidth(const SpectrumAllocation& op,
                                       std::span<const SpectrumAllocation> others,
                                       const UtilityModel& model);

/// Same, with `all[who]` as the operator and every other entry as interferer.
EffectiveBandwidth effective_bandwidth_among(std::span<const SpectrumAllocation> all, std::size_t who,
                                             const UtilityModel& model);

double utility(const SpectrumAllocation& op, std::span<const SpectrumAllocation> others, double lambda,
               const UtilityModel& model);

/// pi_f(lambda) for n operators all on the full band. Throws DomainError for n < 1.
double full_spectrum_utility(int n, double lambda, const UtilityModel& model);

enum class LimitTerm { Include, Exclude };

struct InterferenceCheck {
  bool holds = false;
  /// Operator count whose sharing term reaches r(P), if any.
  std::optional<int> witness_n;
  /// The analytic n -> infinity limit was evaluated (Shannon only).
  bool limit_evaluated = false;
  /// The limit, not a finite n, violates the condition.
  bool limit_violated = false;
  /// max over the scanned n (and the limit, when evaluated).
  double sup_term = 0.0;
};

/// Interference-limited condition: r(P) > n * r(P / ((n-1)P + 1)) for
/// n = 2..n_max, plus the n -> infinity limit (1/ln 2 for Shannon) when
/// `limit` is Include. Non-Shannon rate tables never evaluate the limit.
InterferenceCheck check_interference_limited(const UtilityModel& model, int n_max = 64,
                                             LimitTerm limit = LimitTerm::Include);

enum class PiProperty { Increasing, Concavity, Supermodularity };

struct PiCounterexample {
  PiProperty property;
  double x;
  double lambda;
  double xi;    // larger traffic level (supermodularity only)
  double step;  // Delta
  double lhs;
  double rhs;
};

struct PiPropertyCheck {
  std::optional<PiCounterexample> increasing;
  std::optional<PiCounterexample> concavity;
  std::optional<PiCounterexample> supermodularity;

  bool strictly_increasing() const { return !increasing; }
  bool strictly_concave() const { return !concavity; }
  bool strictly_supermodular() const { return !supermodularity; }
  bool holds() const { return !increasing && !concavity && !supermodularity; }
  /// First violation found, in the order increasing, concavity, supermodularity.
  std::optional<PiCounterexample> first() const;
};

/// Grid check of strict monotonicity, strict concavity and strict
/// supermodularity of pi with an absolute margin of 1e-9. Points with
/// x - step < 0 or x + step > W are skipped.
PiPropertyCheck check_pi_properties(const UtilityModel& model, std::span<const double> x_grid,
                                    std::span<const double> lambda_set, std::span<const double> step_grid);

/// Default grid over [0, W] x {0, 1} used by the dynamic-profile hypothesis gate.
PiPropertyCheck check_pi_properties_default(const UtilityModel& model, std::span<const double> lambda_set);

}  // namespace specshare
