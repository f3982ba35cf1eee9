#pragma once

#include "specshare/spectrum_allocation.hpp"
#include "specshare/traffic.hpp"
#include "specshare/utility_model.hpp"

#include <span>
#include <vector>

namespace specshare {

enum class Phase { Cooperation, Punishment };

/// Trigger-strategy phase shared by the static, entry and dynamic profiles.
///
/// Punishment(k) means k full-band slots remain, the current one included;
/// `remaining == kEverlasting` marks grim-trigger punishment. `audit` says
/// whether last slot's supports must be checked against last slot's
/// prescription: it is off in slot 0 and in the first cooperation slot after a
/// punishment or re-partition, where there is nothing cooperative to audit.
struct PhaseState {
  static constexpr int kEverlasting = -1;

  Phase phase = Phase::Cooperation;
  int remaining = 0;
  bool audit = false;

  static PhaseState start() { return {Phase::Cooperation, 0, false}; }
  static PhaseState cooperation() { return {Phase::Cooperation, 0, true}; }
  static PhaseState punishment(int remaining) { return {Phase::Punishment, remaining, false}; }

  bool cooperating() const noexcept { return phase == Phase::Cooperation; }
  bool everlasting() const noexcept { return phase == Phase::Punishment && remaining == kEverlasting; }
  bool operator==(const PhaseState&) const = default;
};

/// Transition taken when a deviation is detected in a cooperation slot: the
/// current slot becomes punishment slot 1 of T.
PhaseState enter_punishment(int punishment_slots, bool grim);

/// Transition out of a punishment slot.
PhaseState advance_punishment(const PhaseState& state);

struct StaticParams {
  int n = 2;
  /// Bandwidth fractions in operator order; positive, summing to 1.
  std::vector<double> shares;
  /// Punishment length in slots (ignored when grim).
  int punishment_slots = 1;
  /// Everlasting punishment (grim trigger) instead of T slots.
  bool grim = false;

  static StaticParams uniform(int n, int punishment_slots, bool grim = false);
  /// Throws ContractViolation on invalid parameters.
  void validate() const;
};

/// Contiguous block of operator `op` in index order; blocks tile [0, W).
SpectrumAllocation static_allocation(const StaticParams& params, double band_mhz, int op);

struct StaticStepAll {
  PhaseState next;
  std::vector<SpectrumAllocation> allocations;
  /// This slot is a punishment slot.
  bool punishing = false;
};

struct StaticStep {
  PhaseState next;
  SpectrumAllocation allocation;
};

/// Advances the trigger profile one slot for every operator at once.
/// `observed` holds every operator's support in the previous slot; it may be
/// empty when the state does not audit. Throws ContractViolation when an
/// audit is due and observed.size() != n.
StaticStepAll step_all(const StaticParams& params, double band_mhz, const PhaseState& state,
                       std::span<const SpectrumAllocation> observed);

/// Single-operator view of step_all.
StaticStep step(const StaticParams& params, double band_mhz, const PhaseState& state,
                std::span<const SpectrumAllocation> observed, int me);

/// Expected one-slot utility under the prescribed orthogonal split.
double static_expected_utility(const StaticParams& params, const UtilityModel& model, const TrafficSpec& traffic,
                               int op);

/// Smallest T with max_lambda [U-bar(lambda) - pi(w_i, lambda)] < T (u_o^i - u_f^i)
/// for every operator. Returns 1 for a single operator. Throws InfeasibleError
/// when some u_o^i <= u_f^i.
int min_punishment_length(const UtilityModel& model, std::span<const TrafficSpec> traffic,
                          const StaticParams& params);

}  // namespace specshare
