#pragma once

#include "specshare/spectrum_allocation.hpp"
#include "specshare/static_sharing.hpp"

#include <boost/container/small_vector.hpp>

#include <span>
#include <vector>

namespace specshare {

struct DynamicParams {
  int n = 2;
  double band_mhz = 100.0;
  /// Trade quantum Delta in MHz, 0 < Delta <= W/n.
  double trade_mhz = 10.0;
  /// Balance cap in trade units: b_bar = k * Delta.
  int k = 1;
  int punishment_slots = 1;

  /// Builds params from a balance cap in MHz; b_bar / Delta must be integral
  /// within 1e-9.
  static DynamicParams from_cap(int n, double band_mhz, double trade_mhz, double balance_cap_mhz,
                                int punishment_slots);

  double baseline() const noexcept { return band_mhz / n; }
  double balance_cap() const noexcept { return k * trade_mhz; }
  /// Throws ContractViolation on invalid parameters.
  void validate() const;
};

/// Net spectrum lent minus borrowed per operator, kept in integer trade units
/// so conservation and the caps are exact.
class BalanceLedger {
 public:
  BalanceLedger() = default;
  explicit BalanceLedger(int n) : units_(static_cast<std::size_t>(n), 0) {}
  /// Throws ContractViolation unless the units sum to zero.
  explicit BalanceLedger(std::vector<int> units);

  int size() const noexcept { return static_cast<int>(units_.size()); }
  int units(int op) const { return units_.at(static_cast<std::size_t>(op)); }
  std::span<const int> units() const noexcept { return units_; }
  double balance_mhz(int op, double trade_mhz) const { return units(op) * trade_mhz; }

  void record_trade(int borrower, int lender);

  bool operator==(const BalanceLedger&) const = default;

 private:
  std::vector<int> units_;
};

struct Trade {
  int borrower = 0;
  int lender = 0;
  bool operator==(const Trade&) const = default;
};

using TradeList = boost::container::small_vector<Trade, 4>;

/// Policy Q. High reporters that can still borrow are ranked by balance
/// descending, low reporters that can still lend by balance ascending (ties by
/// operator index), and the i-th of each are paired. `reports` holds 0/1.
TradeList trading_policy_q(std::span<const int> reports, const BalanceLedger& ledger, const DynamicParams& params);

/// Width of every operator after the trades; borrowers get w + Delta,
/// lenders w - Delta.
std::vector<double> dynamic_widths(const DynamicParams& params, const TradeList& trades);

/// Contiguous tiling of [0, W) by operator index for the given widths.
std::vector<SpectrumAllocation> tile_widths(double band_mhz, std::span<const double> widths);

struct DynamicState {
  PhaseState phase = PhaseState::start();
  BalanceLedger ledger;
  /// Allocations prescribed in the previous slot; audited against what was observed.
  std::vector<SpectrumAllocation> prescribed;

  static DynamicState initial(int n) { return {PhaseState::start(), BalanceLedger(n), {}}; }
};

struct DynamicStep {
  DynamicState next;
  std::vector<SpectrumAllocation> allocations;
  TradeList trades;
  bool punishing = false;
};

/// One slot of the dynamic profile. Cooperation: audit last slot's supports,
/// then trade by Q, update the ledger and re-tile. A mismatch turns this slot
/// into punishment slot 1 of T; the ledger is frozen while punishing.
/// Throws ContractViolation when reports.size() != n or an audit is due and
/// observed.size() != n.
DynamicStep dynamic_step(const DynamicParams& params, const DynamicState& state, std::span<const int> reports,
                         std::span<const SpectrumAllocation> observed);

}  // namespace specshare
