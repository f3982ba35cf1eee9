#pragma once

#include "specshare/dynamic_sharing.hpp"
#include "specshare/traffic.hpp"
#include "specshare/utility_model.hpp"

#include <span>
#include <string>
#include <vector>

namespace specshare {

struct DeltaCandidate {
  double trade_mhz = 0.0;
  int k = 0;
  bool trade_condition = false;
  bool truthful = false;
  /// Punishment length when one exists (0 otherwise).
  int punishment_slots = 0;
  /// Long-run expected sum of both operators' one-slot utilities.
  double sum_revenue = 0.0;

  bool certified() const noexcept { return trade_condition && truthful && punishment_slots > 0; }
};

struct DeltaChoice {
  DynamicParams params;
  bool certified = false;
  double sum_revenue = 0.0;
  /// Why the choice is uncertified; empty otherwise.
  std::string note;
  std::vector<DeltaCandidate> candidates;
};

/// Every grid Delta that divides the balance cap, with its certification
/// status and stationary sum revenue.
std::vector<DeltaCandidate> evaluate_delta_grid(double band_mhz, double balance_cap_mhz, const UtilityModel& model,
                                                std::span<const TrafficSpec> traffic, double delta,
                                                double step_mhz = 1.0);

/// Two-operator Delta search over multiples of `step_mhz` in (0, W/2] that
/// divide the balance cap. Certification needs the trade-size condition, no profitable
/// misreport in the exact check and a finite punishment length at `delta`;
/// the certified candidate with the largest stationary sum revenue wins (ties
/// to the smaller Delta). When the traffic never produces a trade the smallest
/// Delta is returned uncertified. Throws InfeasibleError when no candidate is
/// certified, and ContractViolation for an empty grid.
DeltaChoice choose_delta(double band_mhz, double balance_cap_mhz, const UtilityModel& model,
                         std::span<const TrafficSpec> traffic, double delta, double step_mhz = 1.0);

/// Stationary sum revenue of the two-operator scheme for a fixed Delta,
/// certified or not.
double dynamic_sum_revenue(const DynamicParams& params, const UtilityModel& model,
                           std::span<const TrafficSpec> traffic);

}  // namespace specshare
