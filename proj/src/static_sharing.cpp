#include "specshare/static_sharing.hpp"

#include "specshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace specshare {

PhaseState enter_punishment(int punishment_slots, bool grim) {
  if (grim) return PhaseState::punishment(PhaseState::kEverlasting);
  return punishment_slots > 1 ? PhaseState::punishment(punishment_slots - 1) : PhaseState::start();
}

PhaseState advance_punishment(const PhaseState& state) {
  if (state.everlasting()) return state;
  return state.remaining > 1 ? PhaseState::punishment(state.remaining - 1) : PhaseState::start();
}

StaticParams StaticParams::uniform(int n, int punishment_slots, bool grim) {
  StaticParams p;
  p.n = n;
  p.shares.assign(static_cast<std::size_t>(std::max(n, 0)), n > 0 ? 1.0 / n : 0.0);
  p.punishment_slots = punishment_slots;
  p.grim = grim;
  return p;
}

void StaticParams::validate() const {
  if (n < 1) throw ContractViolation("static profile needs at least one operator");
  if (shares.size() != static_cast<std::size_t>(n)) throw ContractViolation("need one share per operator");
  double total = 0.0;
  for (double s : shares) {
    if (!(s > 0.0)) throw ContractViolation("shares must be positive");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ContractViolation("shares must sum to 1");
  if (!grim && punishment_slots < 1) throw ContractViolation("punishment length must be at least 1");
}

SpectrumAllocation static_allocation(const StaticParams& params, double band_mhz, int op) {
  if (op < 0 || op >= params.n) throw ContractViolation("operator index out of range");
  double cum = 0.0;
  for (int j = 0; j < op; ++j) cum += params.shares[static_cast<std::size_t>(j)];
  const double lo = quantize_mhz(band_mhz * cum);
  const double hi = op + 1 == params.n ? band_mhz
                                       : quantize_mhz(band_mhz * (cum + params.shares[static_cast<std::size_t>(op)]));
  return SpectrumAllocation::block(lo, hi, band_mhz);
}

StaticStepAll step_all(const StaticParams& params, double band_mhz, const PhaseState& state,
                       std::span<const SpectrumAllocation> observed) {
  const auto n = static_cast<std::size_t>(params.n);
  StaticStepAll out;
  auto full = [&] {
    out.allocations.assign(n, SpectrumAllocation::full_band(band_mhz));
    out.punishing = true;
  };

  if (!state.cooperating()) {
    full();
    out.next = advance_punishment(state);
    return out;
  }

  out.allocations.reserve(n);
  for (int i = 0; i < params.n; ++i) out.allocations.push_back(static_allocation(params, band_mhz, i));

  if (state.audit) {
    if (observed.size() != n) {
      throw ContractViolation("expected " + std::to_string(n) + " observed supports, got " +
                              std::to_string(observed.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!observed[i].same_support(out.allocations[i])) {
        full();
        out.next = enter_punishment(params.punishment_slots, params.grim);
        return out;
      }
    }
  }
  out.next = PhaseState::cooperation();
  return out;
}

StaticStep step(const StaticParams& params, double band_mhz, const PhaseState& state,
                std::span<const SpectrumAllocation> observed, int me) {
  if (me < 0 || me >= params.n) throw ContractViolation("operator index out of range");
  auto all = step_all(params, band_mhz, state, observed);
  return {all.next, std::move(all.allocations[static_cast<std::size_t>(me)])};
}

double static_expected_utility(const StaticParams& params, const UtilityModel& model, const TrafficSpec& traffic,
                               int op) {
  const double w = params.shares.at(static_cast<std::size_t>(op)) * model.band();
  return expectation(traffic, [&](double lam) { return model.pi(w, lam); });
}

int min_punishment_length(const UtilityModel& model, std::span<const TrafficSpec> traffic,
                          const StaticParams& params) {
  params.validate();
  if (traffic.size() != static_cast<std::size_t>(params.n)) {
    throw ContractViolation("need one traffic spec per operator");
  }
  if (params.n == 1) return 1;
  int best = 1;
  for (int i = 0; i < params.n; ++i) {
    const auto& spec = traffic[static_cast<std::size_t>(i)];
    const double w = params.shares[static_cast<std::size_t>(i)] * model.band();
    const double u_o = static_expected_utility(params, model, spec, i);
    const double u_f = expectation(spec, [&](double lam) { return full_spectrum_utility(params.n, lam, model); });
    const double margin = u_o - u_f;
    if (!(margin > 0.0)) {
      throw InfeasibleError("operator " + std::to_string(i + 1) +
                            ": orthogonal share does not beat full-spectrum sharing (interference-limited "
                            "condition violated)");
    }
    double gap = 0.0;
    for (const auto& s : spec.support()) {
      if (s.probability > 0.0) gap = std::max(gap, model.upper_utility(s.level) - model.pi(w, s.level));
    }
    const int t = static_cast<int>(std::floor(gap / margin)) + 1;
    best = std::max(best, t);
  }
  return best;
}

}  // namespace specshare
