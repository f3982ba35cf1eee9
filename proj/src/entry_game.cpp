#include "specshare/entry_game.hpp"

#include "specshare/errors.hpp"

#include <algorithm>
#include <string>

namespace specshare {

double u_f_of_n(int n, const UtilityModel& model, const TrafficSpec& traffic) {
  if (n < 1) throw DomainError("operator count must be at least 1");
  return expectation(traffic, [&](double lam) { return full_spectrum_utility(n, lam, model); });
}

double u_o_of_n(int n, const UtilityModel& model, const TrafficSpec& traffic) {
  if (n < 1) throw DomainError("operator count must be at least 1");
  const double w = model.band() / n;
  return expectation(traffic, [&](double lam) { return model.pi(w, lam); });
}

int max_entrants(double cost, const UtilityModel& model, const TrafficSpec& traffic, int n_cap) {
  if (!(cost >= 0.0)) throw DomainError("investment cost must be non-negative");
  if (n_cap < 1) throw ContractViolation("n_cap must be at least 1");
  int n_star = 0;
  for (int n = 1; n <= n_cap; ++n) {
    if (u_f_of_n(n, model, traffic) < cost) return n_star;
    n_star = n;
  }
  throw CapExceededError("u_f(n) >= cost up to n_cap = " + std::to_string(n_cap) + "; n* is at least that large",
                         n_cap);
}

int punishment_length_entry(int n, const UtilityModel& model, const TrafficSpec& traffic) {
  if (n < 1) throw DomainError("operator count must be at least 1");
  const std::vector<TrafficSpec> specs(static_cast<std::size_t>(n), traffic);
  return min_punishment_length(model, specs, StaticParams::uniform(n, 1));
}

void EntryParams::validate() const {
  if (!(cost >= 0.0)) throw ContractViolation("investment cost must be non-negative");
  for (std::size_t i = 1; i < arrival_slots.size(); ++i) {
    if (arrival_slots[i] <= arrival_slots[i - 1]) throw ContractViolation("arrival slots must be strictly increasing");
  }
  if (n_cap < 1) throw ContractViolation("n_cap must be at least 1");
}

EntryPlan EntryPlan::build(const EntryParams& params, const UtilityModel& model, const TrafficSpec& traffic) {
  params.validate();
  EntryPlan plan;
  plan.n_star = max_entrants(params.cost, model, traffic, params.n_cap);
  // Only market sizes that can actually form need a punishment length.
  const int reachable = std::min<int>(plan.n_star, static_cast<int>(params.arrival_slots.size()));
  plan.punishment.assign(static_cast<std::size_t>(reachable) + 1, 1);
  for (int n = 2; n <= reachable; ++n) plan.punishment[static_cast<std::size_t>(n)] = punishment_length_entry(n, model, traffic);
  return plan;
}

int EntryPlan::punishment_for(int n) const {
  if (n < 1 || static_cast<std::size_t>(n) >= punishment.size()) throw ContractViolation("no punishment length for n");
  return punishment[static_cast<std::size_t>(n)];
}

EntryStepResult entry_step(const EntryPlan& plan, double band_mhz, const EntryState& state,
                           std::optional<EntryArrival> arrival, std::span<const SpectrumAllocation> observed) {
  EntryStepResult out;
  out.next = state;

  if (arrival) {
    ++out.next.arrivals;
    if (out.next.arrivals <= plan.n_star && !state.collapsed) {
      out.decision = EntryDecision::Invest;
      ++out.next.active;
    } else if (arrival->forced) {
      out.decision = EntryDecision::ForcedEntry;
      ++out.next.active;
      out.next.collapsed = true;
    } else {
      out.decision = EntryDecision::StayOut;
    }
  }

  const int n = out.next.active;
  if (n == 0) {
    out.next.phase = PhaseState::start();
    return out;
  }
  if (out.next.collapsed) {
    out.allocations.assign(static_cast<std::size_t>(n), SpectrumAllocation::full_band(band_mhz));
    out.next.phase = PhaseState::punishment(PhaseState::kEverlasting);
    out.punishing = true;
    return out;
  }

  // A new investor changes the partition, so last slot's supports are not
  // compared against this slot's blocks; a pending punishment carries over.
  PhaseState phase = state.phase;
  if (out.decision == EntryDecision::Invest && phase.cooperating()) phase = PhaseState::start();

  const StaticParams params = StaticParams::uniform(n, plan.punishment_for(n));
  auto step = step_all(params, band_mhz, phase, observed);
  out.next.phase = step.next;
  out.allocations = std::move(step.allocations);
  out.punishing = step.punishing;
  return out;
}

}  // namespace specshare
