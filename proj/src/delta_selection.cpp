#include "specshare/delta_selection.hpp"

#include "specshare/balance_chain.hpp"
#include "specshare/errors.hpp"
#include "specshare/verifier.hpp"

#include <cmath>

namespace specshare {

double dynamic_sum_revenue(const DynamicParams& params, const UtilityModel& model,
                           std::span<const TrafficSpec> traffic) {
  return stationary_sum_revenue(BalanceChain(params, model, joint_traffic(traffic)));
}

std::vector<DeltaCandidate> evaluate_delta_grid(double band_mhz, double balance_cap_mhz, const UtilityModel& model,
                                                std::span<const TrafficSpec> traffic, double delta,
                                                double step_mhz) {
  if (traffic.size() != 2) throw ContractViolation("Delta selection is the two-operator case");
  if (!(step_mhz > 0.0)) throw ContractViolation("grid step must be positive");
  const JointTraffic2 joint = joint_traffic(traffic);
  const double w = band_mhz / 2.0;

  std::vector<DeltaCandidate> candidates;
  const int steps = static_cast<int>(std::floor(w / step_mhz + 1e-9));
  for (int j = 1; j <= steps; ++j) {
    const double d = j * step_mhz;
    const double ratio = balance_cap_mhz / d;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) continue;
    DeltaCandidate c;
    c.trade_mhz = d;
    c.k = static_cast<int>(std::round(ratio));
    const auto params = DynamicParams{2, band_mhz, d, c.k, 1};
    c.trade_condition = check_trade_condition(model, w, d);
    c.sum_revenue = stationary_sum_revenue(BalanceChain(params, model, joint));
    try {
      c.truthful = !any_profitable(verify_truthfulness_exact(params, model, joint, delta));
      c.punishment_slots = min_punishment_dynamic(params, model, traffic, delta).T;
    } catch (const HypothesisError&) {
      c.truthful = false;
    } catch (const InfeasibleError&) {
      c.punishment_slots = 0;
    }
    candidates.push_back(c);
  }
  return candidates;
}

DeltaChoice choose_delta(double band_mhz, double balance_cap_mhz, const UtilityModel& model,
                         std::span<const TrafficSpec> traffic, double delta, double step_mhz) {
  DeltaChoice choice;
  choice.candidates = evaluate_delta_grid(band_mhz, balance_cap_mhz, model, traffic, delta, step_mhz);
  if (choice.candidates.empty()) throw ContractViolation("no grid Delta divides the balance cap");
  const JointTraffic2 joint = joint_traffic(traffic);

  if (joint.p01() == 0.0 && joint.p10() == 0.0) {
    const auto& c = choice.candidates.front();
    choice.params = DynamicParams{2, band_mhz, c.trade_mhz, c.k, std::max(c.punishment_slots, 1)};
    choice.sum_revenue = c.sum_revenue;
    choice.note = "traffic never produces a trade; revenue does not depend on Delta";
    return choice;
  }

  const DeltaCandidate* best = nullptr;
  for (const auto& c : choice.candidates) {
    if (c.certified() && (!best || c.sum_revenue > best->sum_revenue)) best = &c;
  }
  if (!best) throw InfeasibleError("no grid Delta is certified at this discount factor");
  choice.params = DynamicParams{2, band_mhz, best->trade_mhz, best->k, best->punishment_slots};
  choice.certified = true;
  choice.sum_revenue = best->sum_revenue;
  return choice;
}

}  // namespace specshare
