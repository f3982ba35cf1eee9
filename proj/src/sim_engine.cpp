#include "specshare/sim_engine.hpp"

#include "specshare/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <thread>

namespace specshare {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kZ99 = 2.3263478740408408;

// Discounted revenue per operator, started at each operator's first active slot.
class RevenueAccumulator {
 public:
  RevenueAccumulator(int n, double delta)
      : delta_(delta), value_(static_cast<std::size_t>(n), 0.0), disc_(static_cast<std::size_t>(n), -1.0) {}

  void add(int op, bool active, double utility) {
    auto& d = disc_[static_cast<std::size_t>(op)];
    if (d < 0.0) {
      if (!active) return;
      d = 1.0;
    }
    value_[static_cast<std::size_t>(op)] += (1.0 - delta_) * d * utility;
    d *= delta_;
  }

  RevenueReport report(double max_utility) const {
    RevenueReport r;
    r.revenue = value_;
    double worst = 0.0;
    for (double d : disc_) worst = std::max(worst, d);
    r.tail_bound = worst * max_utility;
    return r;
  }

 private:
  double delta_;
  std::vector<double> value_;
  std::vector<double> disc_;  // delta^(t - s_i), or -1 before the first active slot
};

double max_one_slot_utility(const Scenario& s) {
  double top = 0.0;
  for (const auto& t : s.traffic) top = std::max(top, s.model.upper_utility(t.max_level()));
  return top;
}

SpectrumAllocation inject(const SpectrumAllocation& prescribed, const DeviationInjector& inj, double band) {
  if (inj.kind == InjectionKind::FullBand) return SpectrumAllocation::full_band(band);
  if (inj.kind == InjectionKind::UseWidth) {
    const auto iv = prescribed.intervals();
    const double lo = iv.empty() ? 0.0 : iv.front().lo;
    const double hi = std::min(quantize_mhz(lo + inj.width_mhz), band);
    return SpectrumAllocation::block(lo, std::max(lo, hi), band);
  }
  return prescribed;
}

void validate_injectors(const Scenario& s, std::span<const DeviationInjector> injectors) {
  const bool dynamic = std::holds_alternative<DynamicScheme>(s.scheme);
  for (const auto& inj : injectors) {
    if (inj.op < 0 || inj.op >= s.n) throw ConfigError("injector targets a non-existent operator");
    if (inj.slot >= static_cast<std::uint64_t>(s.horizon)) throw ConfigError("injector slot is beyond the horizon");
    const bool lie = inj.kind == InjectionKind::LieHigh || inj.kind == InjectionKind::LieLow;
    if (lie && !dynamic) throw ConfigError("traffic lies only exist in the dynamic scheme");
    if (inj.kind == InjectionKind::UseWidth &&
        !(inj.width_mhz >= 0.0 && inj.width_mhz <= s.model.band())) {
      throw ConfigError("injected width must lie in [0, W]");
    }
  }
}

// Runs one game; records the trace only when `trace` is non-null.
RevenueReport simulate(const Scenario& sc, std::span<const DeviationInjector> injectors, std::uint64_t seed,
                       Trace* trace) {
  const int n = sc.n;
  const double band = sc.model.band();
  const auto un = static_cast<std::size_t>(n);
  RevenueAccumulator acc(n, sc.delta);
  if (trace) {
    trace->n = n;
    trace->records.clear();
    trace->trades.clear();
    trace->records.reserve(un * static_cast<std::size_t>(sc.horizon));
  }

  std::vector<double> levels(un);
  std::vector<int> reports(un);
  std::vector<SpectrumAllocation> emitted;
  std::vector<SpectrumAllocation> observed;
  std::vector<double> widths(un), utilities(un), balances(un, 0.0);
  std::vector<const char*> phases(un);
  std::vector<bool> active(un, true);

  // One-shot injectors indexed by slot; persistent ones are few and scanned.
  std::multimap<std::uint64_t, const DeviationInjector*> one_shot;
  std::vector<const DeviationInjector*> persistent;
  for (const auto& inj : injectors) {
    if (inj.persistence == Persistence::OneShot) {
      one_shot.emplace(inj.slot, &inj);
    } else {
      persistent.push_back(&inj);
    }
  }
  auto active_injector = [&](int op, std::uint64_t t, bool width_kind) -> const DeviationInjector* {
    auto matches = [&](const DeviationInjector& inj) {
      const bool w = inj.kind == InjectionKind::UseWidth || inj.kind == InjectionKind::FullBand;
      return inj.op == op && w == width_kind && inj.active_at(t);
    };
    // earlier-listed injectors win, as in a plain scan
    const DeviationInjector* found = nullptr;
    auto [lo, hi] = one_shot.equal_range(t);
    for (auto it = lo; it != hi; ++it) {
      if (matches(*it->second) && (!found || it->second < found)) found = it->second;
    }
    for (const auto* inj : persistent) {
      if (matches(*inj) && (!found || inj < found)) found = inj;
    }
    return found;
  };

  // scheme state
  PhaseState phase = PhaseState::start();
  DynamicState dyn;
  EntryState entry;
  std::optional<EntryPlan> plan;
  std::vector<int> entrants;  // op index of every transmitting entrant, in entry order
  std::size_t next_arrival = 0;
  if (const auto* d = std::get_if<DynamicScheme>(&sc.scheme)) {
    dyn = DynamicState::initial(d->params.n);
    if (!d->initial_units.empty()) dyn.ledger = BalanceLedger(d->initial_units);
  }
  if (const auto* e = std::get_if<EntryScheme>(&sc.scheme)) plan = EntryPlan::build(e->params, sc.model, sc.traffic.at(0));

  for (std::uint64_t t = 0; t < static_cast<std::uint64_t>(sc.horizon); ++t) {
    for (int i = 0; i < n; ++i) {
      levels[static_cast<std::size_t>(i)] = sample(sc.traffic[static_cast<std::size_t>(i)], t, static_cast<std::uint64_t>(i), seed);
    }
    bool punishing = false;
    TradeList trades;
    std::vector<int> transmitting;  // op index per entry of `emitted`

    std::visit(
        overloaded{
            [&](const FullSpectrumScheme&) {
              emitted.assign(un, SpectrumAllocation::full_band(band));
              for (int i = 0; i < n; ++i) transmitting.push_back(i);
            },
            [&](const StaticScheme& s) {
              auto step = step_all(s.params, band, phase, observed);
              phase = step.next;
              punishing = step.punishing;
              emitted = std::move(step.allocations);
              for (int i = 0; i < n; ++i) transmitting.push_back(i);
            },
            [&](const DynamicScheme& s) {
              for (int i = 0; i < n; ++i) {
                int r = levels[static_cast<std::size_t>(i)] > 0.5 ? 1 : 0;
                if (const auto* inj = active_injector(i, t, false)) r = inj->kind == InjectionKind::LieHigh ? 1 : 0;
                reports[static_cast<std::size_t>(i)] = r;
              }
              auto step = dynamic_step(s.params, dyn, reports, observed);
              dyn = std::move(step.next);
              punishing = step.punishing;
              trades = step.trades;
              emitted = std::move(step.allocations);
              for (int i = 0; i < n; ++i) {
                transmitting.push_back(i);
                balances[static_cast<std::size_t>(i)] = dyn.ledger.balance_mhz(i, s.params.trade_mhz);
              }
            },
            [&](const EntryScheme& s) {
              std::optional<EntryArrival> arrival;
              const auto& slots = s.params.arrival_slots;
              if (next_arrival < slots.size() && slots[next_arrival] == t) {
                const int op = static_cast<int>(next_arrival);
                const auto* inj = op < n ? active_injector(op, t, true) : nullptr;
                arrival = EntryArrival{inj && inj->kind == InjectionKind::FullBand};
              }
              auto step = entry_step(*plan, band, entry, arrival, observed);
              if (step.decision && *step.decision != EntryDecision::StayOut) {
                entrants.push_back(static_cast<int>(next_arrival));
              }
              if (arrival) ++next_arrival;
              entry = step.next;
              punishing = step.punishing;
              emitted = std::move(step.allocations);
              transmitting = entrants;
            }},
        sc.scheme);

    // width deviations replace the emitted support of the deviator
    for (std::size_t j = 0; j < transmitting.size(); ++j) {
      if (const auto* inj = active_injector(transmitting[j], t, true)) emitted[j] = inject(emitted[j], *inj, band);
    }

    const bool full = std::holds_alternative<FullSpectrumScheme>(sc.scheme);
    std::fill(active.begin(), active.end(), false);
    std::fill(widths.begin(), widths.end(), 0.0);
    std::fill(utilities.begin(), utilities.end(), 0.0);
    for (std::size_t j = 0; j < transmitting.size(); ++j) {
      const auto op = static_cast<std::size_t>(transmitting[j]);
      active[op] = true;
      widths[op] = emitted[j].width();
      utilities[op] = sc.model.pi(effective_bandwidth_among(emitted, j, sc.model).value, levels[op]);
    }
    for (int i = 0; i < n; ++i) {
      const auto o = static_cast<std::size_t>(i);
      phases[o] = !active[o] ? "inactive" : full ? "full_spectrum" : punishing ? "punishment" : "cooperation";
      acc.add(i, active[o], utilities[o]);
    }
    if (trace) {
      for (int i = 0; i < n; ++i) {
        const auto o = static_cast<std::size_t>(i);
        trace->records.push_back({t, i, levels[o], widths[o], utilities[o], balances[o], phases[o]});
      }
      for (const auto& tr : trades) trace->trades.push_back({t, tr});
    }
    observed.swap(emitted);
  }
  return acc.report(max_one_slot_utility(sc));
}

}  // namespace

std::string scheme_name(const Scheme& scheme) {
  return std::visit(overloaded{[](const FullSpectrumScheme&) { return std::string("full"); },
                               [](const StaticScheme&) { return std::string("static"); },
                               [](const EntryScheme&) { return std::string("entry"); },
                               [](const DynamicScheme&) { return std::string("dynamic"); }},
                    scheme);
}

int auto_horizon(double delta, double tolerance) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("discount factor must lie in [0, 1)");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw DomainError("tail tolerance must lie in (0, 1)");
  if (delta == 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tolerance) / std::log(delta))));
}

void Scenario::validate() const {
  if (n < 1) throw ConfigError("need at least one operator");
  if (traffic.size() != static_cast<std::size_t>(n)) throw ConfigError("need one traffic spec per operator");
  if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("discount factor must lie in [0, 1)");
  if (horizon < 1) throw ConfigError("horizon must be at least 1 slot");
  if (replications < 1) throw ConfigError("replications must be at least 1");
  try {
    std::visit(overloaded{[](const FullSpectrumScheme&) {},
                          [&](const StaticScheme& s) {
                            s.params.validate();
                            if (s.params.n != n) throw ConfigError("static params disagree on the operator count");
                          },
                          [&](const EntryScheme& s) {
                            s.params.validate();
                            if (s.params.arrival_slots.size() != static_cast<std::size_t>(n)) {
                              throw ConfigError("entry needs one arrival slot per prospective operator");
                            }
                            for (const auto& t : traffic) {
                              if (t.support().size() != traffic[0].support().size() ||
                                  !std::equal(t.support().begin(), t.support().end(), traffic[0].support().begin(),
                                              [](const TrafficLevel& a, const TrafficLevel& b) {
                                                return a.level == b.level && a.probability == b.probability;
                                              })) {
                                throw ConfigError("entrants must share one traffic distribution");
                              }
                            }
                          },
                          [&](const DynamicScheme& s) {
                            s.params.validate();
                            if (s.params.n != n) throw ConfigError("dynamic params disagree on the operator count");
                            if (s.params.band_mhz != model.band()) throw ConfigError("dynamic params disagree on the band");
                            for (const auto& t : traffic) {
                              if (!t.is_two_level()) throw ConfigError("dynamic sharing needs traffic levels in {0, 1}");
                            }
                            if (!s.initial_units.empty()) {
                              if (s.initial_units.size() != static_cast<std::size_t>(n)) {
                                throw ConfigError("need one starting balance per operator");
                              }
                              for (int u : s.initial_units) {
                                if (u < -s.params.k || u > s.params.k) throw ConfigError("starting balance outside the caps");
                              }
                              BalanceLedger check(s.initial_units);
                            }
                          }},
               scheme);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

RevenueReport revenue(const Trace& trace, double delta, double max_utility) {
  RevenueAccumulator acc(trace.n, delta);
  for (const auto& r : trace.records) acc.add(r.op, r.phase != "inactive", r.utility);
  return acc.report(max_utility);
}

RunResult run(const Scenario& scenario, std::span<const DeviationInjector> injectors) {
  scenario.validate();
  validate_injectors(scenario, injectors);
  RunResult out;
  out.report = simulate(scenario, injectors, scenario.seed, &out.trace);
  return out;
}

std::vector<std::vector<double>> replicate_revenues(const Scenario& scenario, int replications,
                                                    std::span<const DeviationInjector> injectors, unsigned threads) {
  scenario.validate();
  validate_injectors(scenario, injectors);
  if (replications < 1) throw ConfigError("replications must be at least 1");
  std::vector<std::vector<double>> out(static_cast<std::size_t>(replications));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < replications; r = next++) {
      const auto seed = replication_seed(scenario.seed, static_cast<std::uint64_t>(r));
      out[static_cast<std::size_t>(r)] = simulate(scenario, injectors, seed, nullptr).revenue;
    }
  };
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(replications));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return out;
}

ReplicationStats replicate(const Scenario& scenario, int replications, std::span<const DeviationInjector> injectors,
                           unsigned threads) {
  const auto rev = replicate_revenues(scenario, replications, injectors, threads);
  ReplicationStats stats;
  stats.replications = replications;
  stats.ops.resize(static_cast<std::size_t>(scenario.n));
  for (int i = 0; i < scenario.n; ++i) {
    const auto o = static_cast<std::size_t>(i);
    double sum = 0.0;
    for (const auto& r : rev) sum += r[o];
    const double mean = sum / replications;
    double ss = 0.0;
    for (const auto& r : rev) ss += (r[o] - mean) * (r[o] - mean);
    stats.ops[o].mean = mean;
    stats.ops[o].std_err = replications > 1 ? std::sqrt(ss / (replications - 1) / replications) : 0.0;
  }
  stats.tail_bound = std::pow(scenario.delta, scenario.horizon) * max_one_slot_utility(scenario);
  return stats;
}

PairedComparison paired_comparison(const Scenario& scenario, int replications, int op,
                                   std::span<const DeviationInjector> injectors, unsigned threads) {
  if (op < 0 || op >= scenario.n) throw ConfigError("operator index out of range");
  if (replications < 2) throw ConfigError("a paired comparison needs at least two replications");
  const auto base = replicate_revenues(scenario, replications, {}, threads);
  const auto dev = replicate_revenues(scenario, replications, injectors, threads);
  PairedComparison c;
  c.replications = replications;
  const auto o = static_cast<std::size_t>(op);
  double sum = 0.0;
  for (int r = 0; r < replications; ++r) sum += dev[static_cast<std::size_t>(r)][o] - base[static_cast<std::size_t>(r)][o];
  c.mean_diff = sum / replications;
  double ss = 0.0;
  for (int r = 0; r < replications; ++r) {
    const double d = dev[static_cast<std::size_t>(r)][o] - base[static_cast<std::size_t>(r)][o] - c.mean_diff;
    ss += d * d;
  }
  c.std_err = std::sqrt(ss / (replications - 1) / replications);
  c.upper99 = c.mean_diff + kZ99 * c.std_err;
  return c;
}

}  // namespace specshare
