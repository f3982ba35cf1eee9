#pragma once

#include "specshare/dynamic_sharing.hpp"
#include "specshare/entry_game.hpp"
#include "specshare/static_sharing.hpp"
#include "specshare/traffic.hpp"
#include "specshare/utility_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace specshare {

struct FullSpectrumScheme {};
struct StaticScheme {
  StaticParams params;
};
struct EntryScheme {
  EntryParams params;
};
struct DynamicScheme {
  DynamicParams params;
  /// Starting balances in trade units; empty means all zero.
  std::vector<int> initial_units;
};

using Scheme = std::variant<FullSpectrumScheme, StaticScheme, EntryScheme, DynamicScheme>;

std::string scheme_name(const Scheme& scheme);

/// Horizon H with delta^H < tolerance (1 when delta = 0).
int auto_horizon(double delta, double tolerance = 1e-8);

struct Scenario {
  /// Operators, or prospective entrants for the entry scheme.
  int n = 2;
  UtilityModel model = UtilityModel::linear(100.0, 100.0);
  /// One spec per operator.
  std::vector<TrafficSpec> traffic;
  Scheme scheme = FullSpectrumScheme{};
  double delta = 0.99;
  int horizon = 1833;
  std::uint64_t seed = 1;
  int replications = 1;

  /// Throws ConfigError when the pieces do not fit together.
  void validate() const;
};

enum class InjectionKind { LieHigh, LieLow, UseWidth, FullBand };
enum class Persistence { OneShot, Persistent };

/// Deviation of one operator starting at `slot`. Lies change only the report,
/// width deviations only the emitted support; detection is left to the scheme.
struct DeviationInjector {
  int op = 0;
  std::uint64_t slot = 0;
  InjectionKind kind = InjectionKind::FullBand;
  /// UseWidth: transmit on [lo, lo + width) from the prescribed block start.
  double width_mhz = 0.0;
  Persistence persistence = Persistence::OneShot;

  bool active_at(std::uint64_t t) const noexcept {
    return persistence == Persistence::OneShot ? t == slot : t >= slot;
  }
};

struct TraceRecord {
  std::uint64_t slot = 0;
  int op = 0;
  double traffic = 0.0;
  double width_mhz = 0.0;
  double utility = 0.0;
  double balance_mhz = 0.0;
  /// "cooperation", "punishment", "full_spectrum" or "inactive".
  std::string phase;

  bool operator==(const TraceRecord&) const = default;
};

struct TradeRecord {
  std::uint64_t slot = 0;
  Trade trade;
};

struct Trace {
  int n = 0;
  std::vector<TraceRecord> records;  // slot-major, operator-minor
  std::vector<TradeRecord> trades;
};

struct RevenueReport {
  /// V^i = (1-delta) sum delta^(t - s_i) u_t from the operator's first active slot s_i.
  std::vector<double> revenue;
  /// Upper bound on every operator's truncated tail, delta^H * max one-slot utility.
  double tail_bound = 0.0;
};

struct RunResult {
  Trace trace;
  RevenueReport report;
};

/// Deterministic in (scenario, injectors). Throws ConfigError for an
/// injector the scheme cannot express.
RunResult run(const Scenario& scenario, std::span<const DeviationInjector> injectors = {});

/// Revenue accounting of a complete trace.
RevenueReport revenue(const Trace& trace, double delta, double max_utility = 0.0);

struct OperatorStats {
  double mean = 0.0;
  double std_err = 0.0;
};

struct ReplicationStats {
  int replications = 0;
  std::vector<OperatorStats> ops;
  double tail_bound = 0.0;
};

/// Independent replications; replication r runs with seed
/// replication_seed(scenario.seed, r). Results do not depend on `threads`
/// (0 picks the hardware concurrency).
ReplicationStats replicate(const Scenario& scenario, int replications,
                           std::span<const DeviationInjector> injectors = {}, unsigned threads = 0);

/// Per-replication revenue of every operator, indexed [replication][op].
std::vector<std::vector<double>> replicate_revenues(const Scenario& scenario, int replications,
                                                    std::span<const DeviationInjector> injectors = {},
                                                    unsigned threads = 0);

struct PairedComparison {
  int replications = 0;
  /// Mean of V(deviating) - V(conforming) for the operator of interest.
  double mean_diff = 0.0;
  double std_err = 0.0;
  /// One-sided 99% upper confidence bound of mean_diff.
  double upper99 = 0.0;
};

/// Common-random-number comparison of `op`'s revenue with and without the injectors.
PairedComparison paired_comparison(const Scenario& scenario, int replications, int op,
                                   std::span<const DeviationInjector> injectors, unsigned threads = 0);

}  // namespace specshare
