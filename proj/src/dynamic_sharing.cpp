#include "specshare/dynamic_sharing.hpp"

#include "specshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace specshare {

DynamicParams DynamicParams::from_cap(int n, double band_mhz, double trade_mhz, double balance_cap_mhz,
                                      int punishment_slots) {
  if (!(trade_mhz > 0.0)) throw ContractViolation("trade quantum must be positive");
  const double ratio = balance_cap_mhz / trade_mhz;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 || k < 1.0) {
    throw ContractViolation("balance cap must be a positive integer multiple of the trade quantum");
  }
  DynamicParams p{n, band_mhz, trade_mhz, static_cast<int>(k), punishment_slots};
  p.validate();
  return p;
}

void DynamicParams::validate() const {
  if (n < 2) throw ContractViolation("dynamic sharing needs at least two operators");
  if (!(band_mhz > 0.0)) throw ContractViolation("band must be positive");
  if (!(trade_mhz > 0.0) || trade_mhz > baseline() * (1.0 + 1e-12)) {
    throw ContractViolation("trade quantum must lie in (0, W/n]");
  }
  if (k < 1) throw ContractViolation("balance cap must be at least one trade quantum");
  if (punishment_slots < 1) throw ContractViolation("punishment length must be at least 1");
}

BalanceLedger::BalanceLedger(std::vector<int> units) : units_(std::move(units)) {
  if (std::accumulate(units_.begin(), units_.end(), 0L) != 0) throw ContractViolation("balances must sum to zero");
}

void BalanceLedger::record_trade(int borrower, int lender) {
  units_.at(static_cast<std::size_t>(borrower)) -= 1;
  units_.at(static_cast<std::size_t>(lender)) += 1;
}

TradeList trading_policy_q(std::span<const int> reports, const BalanceLedger& ledger, const DynamicParams& params) {
  if (reports.size() != static_cast<std::size_t>(params.n) || ledger.size() != params.n) {
    throw ContractViolation("need one report and one balance per operator");
  }
  boost::container::small_vector<int, 8> high;
  boost::container::small_vector<int, 8> low;
  for (int i = 0; i < params.n; ++i) {
    const int r = reports[static_cast<std::size_t>(i)];
    if (r != 0 && r != 1) throw ContractViolation("reports must be 0 or 1");
    const int b = ledger.units(i);
    if (r == 1 && b >= -params.k + 1) high.push_back(i);
    if (r == 0 && b <= params.k - 1) low.push_back(i);
  }
  std::stable_sort(high.begin(), high.end(), [&](int a, int b) { return ledger.units(a) > ledger.units(b); });
  std::stable_sort(low.begin(), low.end(), [&](int a, int b) { return ledger.units(a) < ledger.units(b); });

  TradeList trades;
  const std::size_t m = std::min(high.size(), low.size());
  for (std::size_t i = 0; i < m; ++i) trades.push_back({high[i], low[i]});
  return trades;
}

std::vector<double> dynamic_widths(const DynamicParams& params, const TradeList& trades) {
  std::vector<double> widths(static_cast<std::size_t>(params.n), params.baseline());
  for (const auto& t : trades) {
    widths.at(static_cast<std::size_t>(t.borrower)) += params.trade_mhz;
    widths.at(static_cast<std::size_t>(t.lender)) -= params.trade_mhz;
  }
  return widths;
}

std::vector<SpectrumAllocation> tile_widths(double band_mhz, std::span<const double> widths) {
  std::vector<SpectrumAllocation> out;
  out.reserve(widths.size());
  double cum = 0.0;
  double lo = 0.0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    cum += widths[i];
    const double hi = i + 1 == widths.size() ? band_mhz : std::min(quantize_mhz(cum), band_mhz);
    out.push_back(SpectrumAllocation::block(lo, std::max(lo, hi), band_mhz));
    lo = std::max(lo, hi);
  }
  return out;
}

DynamicStep dynamic_step(const DynamicParams& params, const DynamicState& state, std::span<const int> reports,
                         std::span<const SpectrumAllocation> observed) {
  const auto n = static_cast<std::size_t>(params.n);
  if (reports.size() != n) {
    throw ContractViolation("expected " + std::to_string(n) + " reports, got " + std::to_string(reports.size()));
  }
  DynamicStep out;
  out.next.ledger = state.ledger;

  auto punish = [&](PhaseState next) {
    out.allocations.assign(n, SpectrumAllocation::full_band(params.band_mhz));
    out.punishing = true;
    out.next.phase = next;
    return out;
  };

  if (!state.phase.cooperating()) return punish(advance_punishment(state.phase));

  if (state.phase.audit) {
    if (observed.size() != n || state.prescribed.size() != n) {
      throw ContractViolation("audit needs " + std::to_string(n) + " observed and prescribed supports");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!observed[i].same_support(state.prescribed[i])) {
        return punish(enter_punishment(params.punishment_slots, false));
      }
    }
  }

  out.trades = trading_policy_q(reports, state.ledger, params);
  for (const auto& t : out.trades) out.next.ledger.record_trade(t.borrower, t.lender);
  const auto widths = dynamic_widths(params, out.trades);
  out.allocations = tile_widths(params.band_mhz, widths);
  out.next.phase = PhaseState::cooperation();
  out.next.prescribed = out.allocations;
  return out;
}

}  // namespace specshare
