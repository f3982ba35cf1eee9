#pragma once

#include "specshare/spectrum_allocation.hpp"
#include "specshare/static_sharing.hpp"
#include "specshare/traffic.hpp"
#include "specshare/utility_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace specshare {

inline constexpr int kDefaultEntrantCap = 4096;

/// Expected one-slot utility when n operators all use the full band.
double u_f_of_n(int n, const UtilityModel& model, const TrafficSpec& traffic);

/// Expected one-slot utility on an exclusive W/n block.
double u_o_of_n(int n, const UtilityModel& model, const TrafficSpec& traffic);

/// Largest n <= n_cap with u_f(n) >= cost, or 0 when u_f(1) < cost.
/// Throws DomainError for negative cost and CapExceededError (carrying n_cap
/// as the lower bound) when u_f(n_cap) is still >= cost.
int max_entrants(double cost, const UtilityModel& model, const TrafficSpec& traffic,
                 int n_cap = kDefaultEntrantCap);

/// T(n) for the static profile among n identical entrants.
int punishment_length_entry(int n, const UtilityModel& model, const TrafficSpec& traffic);

struct EntryParams {
  double cost = 0.0;
  /// Slot at which prospective operator i (0-based order) arrives; strictly increasing.
  std::vector<std::uint64_t> arrival_slots;
  int n_cap = kDefaultEntrantCap;

  void validate() const;
};

/// Everything an incumbent needs to play the entry profile: n* and T(n) for
/// every market size it may see.
struct EntryPlan {
  int n_star = 0;
  /// punishment[n] = T(n) for n = 1..n_star; index 0 unused.
  std::vector<int> punishment;

  static EntryPlan build(const EntryParams& params, const UtilityModel& model, const TrafficSpec& traffic);
  int punishment_for(int n) const;
};

struct EntryState {
  int active = 0;    // investors so far
  int arrivals = 0;  // prospective operators seen so far
  /// An entrant beyond n* transmitted anyway; everyone is on the full band for good.
  bool collapsed = false;
  PhaseState phase = PhaseState::start();

  bool operator==(const EntryState&) const = default;
};

struct EntryArrival {
  /// Out-of-equilibrium entrant that transmits even though i > n*.
  bool forced = false;
};

enum class EntryDecision { Invest, StayOut, ForcedEntry };

struct EntryStepResult {
  EntryState next;
  std::optional<EntryDecision> decision;
  /// One allocation per transmitting operator in entry order.
  std::vector<SpectrumAllocation> allocations;
  bool punishing = false;
};

/// One slot of the entry profile. An arrival is resolved at the slot boundary:
/// investor i <= n* joins and every active operator re-partitions into W/n
/// blocks from this slot on; i > n* stays out unless forced, in which case
/// every operator (entrant included) uses the full band from now on.
/// `observed` are last slot's supports of the operators active last slot.
EntryStepResult entry_step(const EntryPlan& plan, double band_mhz, const EntryState& state,
                           std::optional<EntryArrival> arrival, std::span<const SpectrumAllocation> observed);

}  // namespace specshare
