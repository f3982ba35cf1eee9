#pragma once

#include "specshare/delta_selection.hpp"
#include "specshare/sim_engine.hpp"
#include "specshare/verifier.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace specshare {

struct ParsedScenario {
  Scenario scenario;
  /// How automatic values were resolved (Delta, T, horizon).
  std::vector<std::string> notes;
};

/// Reads `dotted.key = value` lines (# starts a comment). Unknown, duplicate
/// or malformed keys and out-of-range values raise ParseError with the line
/// number; verifier infeasibility from `auto` values propagates unchanged.
ParsedScenario parse_scenario(std::istream& in);
ParsedScenario parse_scenario_file(const std::filesystem::path& path);

/// Shortest decimal that round-trips, independent of the locale.
std::string format_double(double v);
/// Locale-independent parse of a whole field; throws ParseError on junk.
double parse_double(std::string_view text, int line = 0);

/// "a:b:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec);

// ---- CSV ---------------------------------------------------------------------

inline constexpr std::string_view kTraceHeader = "slot,operator,traffic,width_mhz,utility,balance_mhz,phase";
inline constexpr std::string_view kSummaryHeader = "operator,scheme,mean_revenue,std_err";
inline constexpr std::string_view kFindingsHeader = "state,deviation,gain,loss,profitable";
inline constexpr std::string_view kFig2Header = "cost,n_star";
inline constexpr std::string_view kFig3Header = "p_db,revenue_full,revenue_static,revenue_dynamic";
inline constexpr std::string_view kFig4Header = "balance_cap_mhz,dynamic_over_full_percent";

/// Operators are numbered from 1 in every CSV.
void write_trace_csv(std::ostream& out, const Trace& trace);
Trace read_trace_csv(std::istream& in);

struct SummaryRow {
  int op = 0;
  std::string scheme;
  double mean_revenue = 0.0;
  double std_err = 0.0;
  bool operator==(const SummaryRow&) const = default;
};

std::vector<SummaryRow> summary_rows(const ReplicationStats& stats, const Scheme& scheme);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(std::istream& in);

void write_findings_csv(std::ostream& out, const std::vector<DeviationFinding>& findings);

struct Fig2Row {
  double cost = 0.0;
  int n_star = 0;
  /// The scan hit its cap; n_star is a lower bound.
  bool capped = false;
};
struct Fig3Row {
  double p_db = 0.0;
  double revenue_full = 0.0;
  double revenue_static = 0.0;
  /// NaN when no Delta is certified at this power.
  double revenue_dynamic = 0.0;
};
struct Fig4Row {
  double balance_cap_mhz = 0.0;
  double dynamic_over_full_percent = 0.0;
};

void write_fig2_csv(std::ostream& out, const std::vector<Fig2Row>& rows);
void write_fig3_csv(std::ostream& out, const std::vector<Fig3Row>& rows);
void write_fig4_csv(std::ostream& out, const std::vector<Fig4Row>& rows);

// ---- figure presets and commands ------------------------------------------------

/// Entry-cost sweep: Linear pi, W = 100 MHz, P = 100, E[Lambda] = 1/2.
std::vector<Fig2Row> fig2_rows(const std::vector<double>& costs);

struct Fig3Options {
  double balance_cap_mhz = 50.0;
  double delta = 0.99;
  double p_low_1 = 0.75;
  double p_low_2 = 0.5;
  /// 0 uses the stationary chain; otherwise the mean of this many simulated runs.
  int replications = 0;
  std::uint64_t seed = 1;
};

/// Total revenue of both operators vs P in dB under the Cobb-Douglas preset.
std::vector<Fig3Row> fig3_rows(const std::vector<double>& p_db, const Fig3Options& options = {});

struct Fig4Options {
  /// log2(1 + P) = 8.
  double power = 255.0;
  double delta = 0.99;
  double p_low_1 = 0.75;
  double p_low_2 = 0.5;
  /// Best Delta regardless of certification instead of the certified optimum.
  bool uncertified = false;
};

/// Dynamic improvement over full-spectrum sharing vs the balance cap. NaN
/// marks a cap with no certified Delta.
std::vector<Fig4Row> fig4_rows(const std::vector<double>& caps, const Fig4Options& options = {});

/// Cobb-Douglas preset of the revenue figures at power P.
UtilityModel figure_model(double power);
std::vector<TrafficSpec> figure_traffic(double p_low_1, double p_low_2);

struct CommandResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> written;
  std::string message;
};

struct SimulateOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
};

CommandResult cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                           const SimulateOverrides& overrides = {});
/// Exit code 0 iff no profitable finding.
CommandResult cmd_verify(const std::filesystem::path& scenario, const std::filesystem::path& out_dir);
CommandResult cmd_fig2(const std::vector<double>& costs, const std::filesystem::path& out_dir);
CommandResult cmd_fig3(const std::vector<double>& p_db, const std::filesystem::path& out_dir,
                       const Fig3Options& options = {});
CommandResult cmd_fig4(const std::vector<double>& caps, const std::filesystem::path& out_dir,
                       const Fig4Options& options = {});

}  // namespace specshare
