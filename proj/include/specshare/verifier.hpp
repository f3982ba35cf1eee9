#pragma once

#include "specshare/balance_chain.hpp"
#include "specshare/dynamic_sharing.hpp"
#include "specshare/entry_game.hpp"
#include "specshare/static_sharing.hpp"
#include "specshare/traffic.hpp"
#include "specshare/utility_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace specshare {

/// Absolute margin on normalized revenue before a deviation counts as profitable.
inline constexpr double kProfitTolerance = 1e-9;

enum class DeviationKind { LieHigh, LieLow, Detectable, Enter, StayOut };

std::string to_string(DeviationKind kind);

struct DeviationFinding {
  /// Phase, balances and traffic; contains no commas.
  std::string state;
  DeviationKind kind = DeviationKind::Detectable;
  int op = 0;
  double gain = 0.0;
  double loss = 0.0;
  bool profitable = false;
  /// Trade events of a lie in the n-operator scheme: "F&E", "F&!E", "!F&E", "!F&!E".
  std::string event;
  /// Half-width of the one-sided 99% interval on gain - loss (Monte Carlo only).
  double ci = 0.0;
};

bool any_profitable(std::span<const DeviationFinding> findings);

/// Two-operator binary traffic from per-operator specs. Throws DomainError
/// when a support is not contained in {0, 1}.
JointTraffic2 joint_traffic(std::span<const TrafficSpec> traffic);

// ---- two operators ---------------------------------------------------------

/// One-slot gain of operator `op` from flipping its report at traffic
/// (l1, l2) and balance b (operator 1's units).
double lying_gain(int l1, int l2, int b, const DynamicParams& params, const UtilityModel& model, int op = 0);

/// pi(w+Delta, 1) - pi(w, 1) - (pi(w, 0) - pi(w-Delta, 0)).
double trade_condition_margin(const UtilityModel& model, double w, double trade_mhz);
bool check_trade_condition(const UtilityModel& model, double w, double trade_mhz);

/// Exact one-shot check of every misreport at every balance and traffic pair
/// of positive probability. Throws HypothesisError when p01 or p10 is zero.
std::vector<DeviationFinding> verify_truthfulness_exact(const DynamicParams& params, const UtilityModel& model,
                                                        const JointTraffic2& traffic, double delta);
std::vector<DeviationFinding> verify_truthfulness_exact(const DynamicParams& params, const UtilityModel& model,
                                                        std::span<const TrafficSpec> traffic, double delta);

struct LossBound {
  double value = 0.0;
  /// Last slot summed.
  int horizon = 0;
  /// Probability that the two trajectories have not merged by the horizon.
  double unabsorbed = 0.0;
  /// Upper bound on the truncated part of the series.
  double tail = 0.0;
};

/// Future loss of operator 1 after it gains one trade unit by lying: the
/// truthful trajectory starts at `balance` (operator 1's units after the
/// slot), the lying one a unit lower, and the loss sum_{tau>=1} delta^tau m_tau
/// is accumulated from the first-merge distribution. Not normalized by
/// (1-delta). Requires -k+1 <= balance <= k.
LossBound lying_loss_bound(const DynamicParams& params, const UtilityModel& model, const JointTraffic2& traffic,
                           double delta, int balance);

struct PunishmentTerms {
  double z1 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
};

PunishmentTerms punishment_bound_terms(const DynamicParams& params, const UtilityModel& model);

enum class PunishmentRoute { Bound, Exact };

struct PunishmentSizing {
  int T = 1;
  PunishmentRoute route = PunishmentRoute::Bound;
  PunishmentTerms terms;
};

/// Punishment length for the dynamic profile. Requires pi strictly concave and
/// supermodular on the default grid and the interference-limited condition
/// for n operators (InfeasibleError otherwise). Uses the z bound when z3 > 0;
/// otherwise the smallest T for which the exact detectable-deviation check
/// passes at `delta` (InfeasibleError when none does).
PunishmentSizing min_punishment_dynamic(const DynamicParams& params, const UtilityModel& model,
                                        std::span<const TrafficSpec> traffic, double delta);

/// Exact check of every detectable deviation in cooperation: full band in the
/// deviation slot (with either report), then params.punishment_slots slots of
/// full-spectrum play with a frozen ledger.
std::vector<DeviationFinding> verify_detectable_dynamic(const DynamicParams& params, const UtilityModel& model,
                                                        std::span<const TrafficSpec> traffic, double delta);

// ---- n operators -------------------------------------------------------------

inline constexpr std::size_t kDefaultExactLimit = 200000;

struct MonteCarloOptions {
  int sample_states = 16;
  int rollouts = 400;
  std::uint64_t seed = 1;
  /// Rollout cap in slots; 0 picks the delta tail rule.
  int horizon = 0;
};

enum class VerificationMode { Exact, MonteCarlo };

struct NOpsVerification {
  VerificationMode mode = VerificationMode::Exact;
  /// Balance vectors times traffic patterns.
  std::size_t state_count = 0;
  std::vector<DeviationFinding> findings;
  /// 2(pi(w,0)-pi(w-Delta,0)) - (pi(w+Delta,0)-pi(w-Delta,0)); positive under strict concavity.
  double fe_margin = 0.0;
};

/// Number of balance vectors with entries in [-k, k] summing to zero.
std::size_t balance_state_count(int n, int k);

/// Truthfulness of the n-operator profile. Exact joint-chain check when
/// balance states times 2^n fits `exact_limit`, else paired Monte Carlo
/// rollouts from sampled states. Throws DomainError for non-binary traffic and
/// HypothesisError when some operator can never be the higher reporter.
NOpsVerification verify_truthfulness_n_ops(const DynamicParams& params, const UtilityModel& model,
                                           std::span<const TrafficSpec> traffic, double delta,
                                           std::size_t exact_limit = kDefaultExactLimit,
                                           const MonteCarloOptions& mc = {});

// ---- static and entry ---------------------------------------------------------

/// Detectable deviations from the static profile in cooperation, per operator
/// and traffic level.
std::vector<DeviationFinding> verify_static(const StaticParams& params, const UtilityModel& model,
                                            std::span<const TrafficSpec> traffic, double delta);

/// Entry decisions of the n*-th and (n*+1)-th arrival plus the static checks
/// for every market size the plan can reach.
std::vector<DeviationFinding> verify_entry(const EntryParams& params, const UtilityModel& model,
                                           const TrafficSpec& traffic, double delta);

}  // namespace specshare
