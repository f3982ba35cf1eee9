#include "specshare/verifier.hpp"

#include "specshare/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

namespace specshare {

namespace {

// one-sided 99% normal quantile
constexpr double kZ99 = 2.3263478740408408;

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

int level_of(std::size_t pattern, int op, int n) { return static_cast<int>((pattern >> (n - 1 - op)) & 1U); }

std::string describe_state(std::span<const int> units, double trade_mhz, std::span<const int> levels) {
  std::string s = "b=(";
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i) s += ';';
    s += fmt(units[i] * trade_mhz);
  }
  s += ") traffic=(";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(levels[i]);
  }
  return s + ")";
}

void require_binary(std::span<const TrafficSpec> traffic) {
  for (const auto& t : traffic) {
    if (!t.is_two_level()) throw DomainError("dynamic profiles need traffic levels in {0, 1}");
  }
}

void check_delta(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("discount factor must lie in [0, 1)");
}

// Role of `op` in a trade list: +1 borrower, -1 lender, 0 neither.
int role(const TradeList& trades, int op) {
  for (const auto& t : trades) {
    if (t.borrower == op) return 1;
    if (t.lender == op) return -1;
  }
  return 0;
}

// Event tag of a misreport: F = the lie earns the favourable
// trade role, E = the truth would have cost the unfavourable one.
std::string lie_event(int true_level, int role_truth, int role_lie) {
  const int favourable = true_level == 0 ? 1 : -1;
  const bool f = role_lie == favourable;
  const bool e = role_truth == -favourable;
  return std::string(f ? "F" : "!F") + "&" + (e ? "E" : "!E");
}

struct Slot {
  TradeList trades;
  std::vector<double> widths;
  BalanceLedger next;
};

Slot play(const DynamicParams& params, const BalanceLedger& ledger, std::span<const int> reports) {
  Slot s;
  s.trades = trading_policy_q(reports, ledger, params);
  s.widths = dynamic_widths(params, s.trades);
  s.next = ledger;
  for (const auto& t : s.trades) s.next.record_trade(t.borrower, t.lender);
  return s;
}

std::vector<double> pattern_probabilities(std::span<const TrafficSpec> traffic) {
  const int n = static_cast<int>(traffic.size());
  std::vector<double> prob(std::size_t{1} << n, 1.0);
  for (std::size_t p = 0; p < prob.size(); ++p) {
    for (int i = 0; i < n; ++i) {
      const double ph = traffic[static_cast<std::size_t>(i)].p_high();
      prob[p] *= level_of(p, i, n) ? ph : 1.0 - ph;
    }
  }
  return prob;
}

// Joint balance chain of n operators under truthful play; states are the
// balance vectors in lexicographic order.
class JointChain {
 public:
  JointChain(const DynamicParams& params, const UtilityModel& model, std::span<const TrafficSpec> traffic)
      : params_(params), model_(model), prob_(pattern_probabilities(traffic)) {
    std::vector<int> cur(static_cast<std::size_t>(params.n));
    enumerate(cur, 0, 0);
    for (std::size_t s = 0; s < states_.size(); ++s) index_.emplace(key(states_[s]), static_cast<int>(s));
  }

  std::size_t size() const noexcept { return states_.size(); }
  std::size_t patterns() const noexcept { return prob_.size(); }
  double probability(std::size_t p) const { return prob_[p]; }
  const BalanceLedger& state(std::size_t s) const { return states_[s]; }
  int index(const BalanceLedger& b) const { return index_.at(key(b)); }

  std::vector<int> levels(std::size_t p) const {
    std::vector<int> l(static_cast<std::size_t>(params_.n));
    for (int i = 0; i < params_.n; ++i) l[static_cast<std::size_t>(i)] = level_of(p, i, params_.n);
    return l;
  }

  Eigen::MatrixXd values(double delta) const {
    const auto s = static_cast<Eigen::Index>(size());
    const int n = params_.n;
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::MatrixXd rewards = Eigen::MatrixXd::Zero(s, n);
    triplets.reserve(size() * 4);
    for (std::size_t i = 0; i < size(); ++i) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
      for (std::size_t p = 0; p < patterns(); ++p) {
        if (prob_[p] == 0.0) continue;
        const auto lv = levels(p);
        const auto slot = play(params_, states_[i], lv);
        triplets.emplace_back(static_cast<int>(i), index(slot.next), -delta * prob_[p]);
        for (int op = 0; op < n; ++op) {
          rewards(static_cast<Eigen::Index>(i), op) +=
              prob_[p] * model_.pi(slot.widths[static_cast<std::size_t>(op)], lv[static_cast<std::size_t>(op)]);
        }
      }
    }
    Eigen::SparseMatrix<double> a(s, s);
    a.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("joint balance chain factorization failed");
    Eigen::MatrixXd v = lu.solve((1.0 - delta) * rewards);
    return v;
  }

 private:
  static std::vector<int> key(const BalanceLedger& b) { return {b.units().begin(), b.units().end()}; }

  void enumerate(std::vector<int>& cur, int pos, int sum) {
    const int n = params_.n;
    const int k = params_.k;
    if (pos == n) {
      if (sum == 0) states_.emplace_back(cur);
      return;
    }
    const int rest = n - pos - 1;
    for (int v = -k; v <= k; ++v) {
      const int s = sum + v;
      if (s - rest * k > 0 || s + rest * k < 0) continue;
      cur[static_cast<std::size_t>(pos)] = v;
      enumerate(cur, pos + 1, s);
    }
  }

  DynamicParams params_;
  UtilityModel model_;
  std::vector<double> prob_;
  std::vector<BalanceLedger> states_;
  std::map<std::vector<int>, int> index_;
};

std::vector<double> full_spectrum_values(const DynamicParams& params, const UtilityModel& model,
                                         std::span<const TrafficSpec> traffic) {
  std::vector<double> u_f;
  for (const auto& t : traffic) {
    u_f.push_back(expectation(t, [&](double lam) { return full_spectrum_utility(params.n, lam, model); }));
  }
  return u_f;
}

// Exact detectable-deviation records: gain - loss(T) = a + delta^(T+1) * c.
struct DetectableTerm {
  std::size_t state;
  std::size_t pattern;
  int op;
  double gain;
  double a;
  double c;
};

std::vector<DetectableTerm> detectable_terms(const JointChain& chain, const Eigen::MatrixXd& v,
                                             const DynamicParams& params, const UtilityModel& model,
                                             std::span<const double> u_f, double delta) {
  std::vector<DetectableTerm> terms;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    for (std::size_t p = 0; p < chain.patterns(); ++p) {
      if (chain.probability(p) == 0.0) continue;
      auto lv = chain.levels(p);
      const auto truth = play(params, chain.state(s), lv);
      const int next_truth = chain.index(truth.next);
      for (int op = 0; op < params.n; ++op) {
        const auto o = static_cast<std::size_t>(op);
        const double lam = lv[o];
        const double gain = (1.0 - delta) * (model.upper_utility(lam) - model.pi(truth.widths[o], lam));
        const double uf = u_f[o];
        // The deviator may also misreport in the deviation slot; only the
        // post-punishment continuation depends on the report, so keep the best one.
        double v_dev = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < 2; ++r) {
          auto reports = lv;
          reports[o] = r;
          v_dev = std::max(v_dev, v(chain.index(play(params, chain.state(s), reports).next), op));
        }
        terms.push_back({s, p, op, gain, gain + delta * uf - delta * v(next_truth, op), v_dev - uf});
      }
    }
  }
  return terms;
}

JointChain make_joint_chain(const DynamicParams& params, const UtilityModel& model,
                            std::span<const TrafficSpec> traffic, std::size_t limit) {
  const std::size_t count = balance_state_count(params.n, params.k) << params.n;
  if (count > limit) {
    throw InfeasibleError("joint balance chain has " + std::to_string(count) + " states, over the budget of " +
                          std::to_string(limit));
  }
  return JointChain(params, model, traffic);
}

}  // namespace

std::string to_string(DeviationKind kind) {
  switch (kind) {
    case DeviationKind::LieHigh: return "lie_high";
    case DeviationKind::LieLow: return "lie_low";
    case DeviationKind::Detectable: return "detectable";
    case DeviationKind::Enter: return "enter";
    case DeviationKind::StayOut: return "stay_out";
  }
  return "unknown";
}

bool any_profitable(std::span<const DeviationFinding> findings) {
  return std::any_of(findings.begin(), findings.end(), [](const auto& f) { return f.profitable; });
}

JointTraffic2 joint_traffic(std::span<const TrafficSpec> traffic) {
  if (traffic.size() != 2) throw ContractViolation("need two traffic specs");
  require_binary(traffic);
  return JointTraffic2::product(traffic[0], traffic[1]);
}

double lying_gain(int l1, int l2, int b, const DynamicParams& params, const UtilityModel& model, int op) {
  if (params.n != 2) throw ContractViolation("lying_gain is the two-operator case");
  if (op != 0 && op != 1) throw ContractViolation("operator index out of range");
  if (b < -params.k || b > params.k) throw ContractViolation("balance outside the caps");
  const BalanceLedger ledger(std::vector<int>{b, -b});
  int truth[2] = {l1, l2};
  int lie[2] = {l1, l2};
  lie[op] = 1 - lie[op];
  const auto t = play(params, ledger, truth);
  const auto d = play(params, ledger, lie);
  const auto o = static_cast<std::size_t>(op);
  return model.pi(d.widths[o], truth[op]) - model.pi(t.widths[o], truth[op]);
}

double trade_condition_margin(const UtilityModel& model, double w, double trade_mhz) {
  if (!(trade_mhz > 0.0) || trade_mhz > w) throw DomainError("trade quantum must lie in (0, w]");
  return (model.pi(w + trade_mhz, 1.0) - model.pi(w, 1.0)) - (model.pi(w, 0.0) - model.pi(w - trade_mhz, 0.0));
}

bool check_trade_condition(const UtilityModel& model, double w, double trade_mhz) {
  return trade_condition_margin(model, w, trade_mhz) > 0.0;
}

std::vector<DeviationFinding> verify_truthfulness_exact(const DynamicParams& params, const UtilityModel& model,
                                                        const JointTraffic2& traffic, double delta) {
  check_delta(delta);
  if (traffic.p01() == 0.0 || traffic.p10() == 0.0) {
    throw HypothesisError("each operator must sometimes be the only high-traffic one (p01 > 0 and p10 > 0)");
  }
  const BalanceChain chain(params, model, traffic);
  const ValueTable v = value_function(chain, delta);
  std::vector<DeviationFinding> out;
  for (int b = -params.k; b <= params.k; ++b) {
    const int units[2] = {b, -b};
    const BalanceLedger ledger(std::vector<int>{b, -b});
    for (int l1 = 0; l1 < 2; ++l1) {
      for (int l2 = 0; l2 < 2; ++l2) {
        if (traffic.p[l1][l2] == 0.0) continue;
        const int truth[2] = {l1, l2};
        const auto t = play(params, ledger, truth);
        const int next_truth = t.next.units(0);
        for (int op = 0; op < 2; ++op) {
          int lie[2] = {l1, l2};
          lie[op] = 1 - lie[op];
          const auto d = play(params, ledger, lie);
          const auto o = static_cast<std::size_t>(op);
          DeviationFinding f;
          f.state = describe_state(units, params.trade_mhz, truth);
          f.kind = truth[op] == 0 ? DeviationKind::LieHigh : DeviationKind::LieLow;
          f.op = op;
          f.gain = (1.0 - delta) * (model.pi(d.widths[o], truth[op]) - model.pi(t.widths[o], truth[op]));
          f.loss = delta * (v.at(op, next_truth) - v.at(op, d.next.units(0)));
          f.profitable = f.gain - f.loss > kProfitTolerance;
          f.event = lie_event(truth[op], role(t.trades, op), role(d.trades, op));
          out.push_back(std::move(f));
        }
      }
    }
  }
  return out;
}

std::vector<DeviationFinding> verify_truthfulness_exact(const DynamicParams& params, const UtilityModel& model,
                                                        std::span<const TrafficSpec> traffic, double delta) {
  return verify_truthfulness_exact(params, model, joint_traffic(traffic), delta);
}

LossBound lying_loss_bound(const DynamicParams& params, const UtilityModel& model, const JointTraffic2& traffic,
                           double delta, int balance) {
  check_delta(delta);
  if (params.n != 2) throw ContractViolation("lying_loss_bound is the two-operator case");
  const int k = params.k;
  if (balance < -k + 1 || balance > k) throw ContractViolation("balance must lie in [-k+1, k]");
  const double w = params.baseline();
  const double d = params.trade_mhz;
  const double a = model.pi(w + d, 1.0) - model.pi(w, 1.0);
  const double b = model.pi(w, 0.0) - model.pi(w - d, 0.0);
  const double p = traffic.p10();
  const double q = traffic.p01();
  const double scale = std::max(a, b);

  LossBound out;
  if (delta == 0.0) return out;

  // mass[x + k - 1] for x in [-k+1, k]: the truthful trajectory's balance
  // while it still runs one unit above the lying one.
  std::vector<double> mass(static_cast<std::size_t>(2 * k), 0.0);
  std::vector<double> next(mass.size());
  mass[static_cast<std::size_t>(balance + k - 1)] = 1.0;
  double alive = 1.0;
  double disc = 1.0;
  constexpr int kMaxSteps = 50'000'000;
  for (int tau = 1; tau <= kMaxSteps; ++tau) {
    disc *= delta;
    std::fill(next.begin(), next.end(), 0.0);
    double m_tau = 0.0;
    for (int x = -k + 1; x <= k; ++x) {
      const double mx = mass[static_cast<std::size_t>(x + k - 1)];
      if (mx == 0.0) continue;
      double stay = mx;
      if (x == -k + 1) {
        m_tau += mx * p * a;
      } else {
        next[static_cast<std::size_t>(x - 1 + k - 1)] += mx * p;
      }
      if (x == k) {
        m_tau += mx * q * b;
      } else {
        next[static_cast<std::size_t>(x + 1 + k - 1)] += mx * q;
      }
      stay -= mx * (p + q);
      next[static_cast<std::size_t>(x + k - 1)] += stay;
    }
    out.value += disc * m_tau;
    mass.swap(next);
    alive = 0.0;
    for (double m : mass) alive += m;
    out.horizon = tau;
    out.unabsorbed = alive;
    const double remaining = scale * disc * delta / (1.0 - delta);
    if (alive < 1e-12 || alive * remaining < 1e-15) {
      out.tail = alive * remaining;
      return out;
    }
  }
  out.tail = alive * scale * disc * delta / (1.0 - delta);
  return out;
}

PunishmentTerms punishment_bound_terms(const DynamicParams& params, const UtilityModel& model) {
  const double w = params.baseline();
  const double d = params.trade_mhz;
  PunishmentTerms z;
  z.z1 = std::max(model.pi(model.band(), 0.0) - model.pi(w - d, 0.0), model.pi(model.band(), 1.0) - model.pi(w - d, 1.0));
  z.z2 = 2.0 * params.k * (model.pi(w + d, 1.0) - model.pi(w, 1.0));
  z.z3 = model.pi(w - d, 0.0) - full_spectrum_utility(params.n, 0.0, model);
  return z;
}

PunishmentSizing min_punishment_dynamic(const DynamicParams& params, const UtilityModel& model,
                                        std::span<const TrafficSpec> traffic, double delta) {
  params.validate();
  check_delta(delta);
  if (traffic.size() != static_cast<std::size_t>(params.n)) throw ContractViolation("need one traffic spec per operator");
  require_binary(traffic);
  const double levels[] = {0.0, 1.0};
  const auto props = check_pi_properties_default(model, levels);
  if (!props.holds()) {
    throw InfeasibleError("utility is not strictly increasing, strictly concave and strictly supermodular; "
                          "punishment sizing for the dynamic profile does not apply");
  }
  if (!check_interference_limited(model, params.n, LimitTerm::Exclude).holds) {
    throw InfeasibleError("interference-limited condition fails for " + std::to_string(params.n) + " operators");
  }

  PunishmentSizing out;
  out.terms = punishment_bound_terms(params, model);
  if (out.terms.z3 > 0.0) {
    out.route = PunishmentRoute::Bound;
    out.T = static_cast<int>(std::floor((out.terms.z1 + out.terms.z2) / out.terms.z3)) + 1;
    return out;
  }

  out.route = PunishmentRoute::Exact;
  const auto chain = make_joint_chain(params, model, traffic, kDefaultExactLimit);
  const Eigen::MatrixXd v = chain.values(delta);
  const auto u_f = full_spectrum_values(params, model, traffic);
  const auto terms = detectable_terms(chain, v, params, model, u_f, delta);

  // gain - loss(T) = a + delta^(T+1) c must stay <= tolerance.
  long lo = 1;
  long hi = std::numeric_limits<long>::max();
  const double tol = kProfitTolerance;
  for (const auto& t : terms) {
    auto d_of = [&](long T) { return t.a + std::pow(delta, static_cast<double>(T + 1)) * t.c; };
    if (t.c > 0.0) {
      if (t.a > tol) throw InfeasibleError("no punishment length deters a detectable deviation at this discount");
      if (d_of(1) <= tol) continue;
      long T = static_cast<long>(std::ceil(std::log((tol - t.a) / t.c) / std::log(delta))) - 1;
      T = std::max(T, 1L);
      while (T > 1 && d_of(T - 1) <= tol) --T;
      while (d_of(T) > tol) ++T;
      lo = std::max(lo, T);
    } else {
      if (d_of(1) > tol) throw InfeasibleError("no punishment length deters a detectable deviation at this discount");
      if (t.a <= tol || delta == 0.0) continue;
      long T = 1;
      while (d_of(T + 1) <= tol) ++T;
      hi = std::min(hi, T);
    }
  }
  if (lo > hi) throw InfeasibleError("no punishment length deters every detectable deviation at this discount");
  if (lo > std::numeric_limits<int>::max()) throw InfeasibleError("punishment length overflows");
  out.T = static_cast<int>(lo);
  return out;
}

std::vector<DeviationFinding> verify_detectable_dynamic(const DynamicParams& params, const UtilityModel& model,
                                                        std::span<const TrafficSpec> traffic, double delta) {
  params.validate();
  check_delta(delta);
  if (traffic.size() != static_cast<std::size_t>(params.n)) throw ContractViolation("need one traffic spec per operator");
  require_binary(traffic);
  const auto chain = make_joint_chain(params, model, traffic, kDefaultExactLimit);
  const Eigen::MatrixXd v = chain.values(delta);
  const auto u_f = full_spectrum_values(params, model, traffic);
  const double decay = std::pow(delta, static_cast<double>(params.punishment_slots + 1));
  std::vector<DeviationFinding> out;
  for (const auto& t : detectable_terms(chain, v, params, model, u_f, delta)) {
    DeviationFinding f;
    const auto lv = chain.levels(t.pattern);
    f.state = "cooperation " + describe_state(chain.state(t.state).units(), params.trade_mhz, lv);
    f.kind = DeviationKind::Detectable;
    f.op = t.op;
    f.gain = t.gain;
    f.loss = t.gain - (t.a + decay * t.c);
    f.profitable = f.gain - f.loss > kProfitTolerance;
    out.push_back(std::move(f));
  }
  return out;
}

std::size_t balance_state_count(int n, int k) {
  if (n < 1 || k < 0) throw ContractViolation("need n >= 1 and k >= 0");
  // ways[s + n*k] = number of prefixes with sum s
  const int span = 2 * n * k + 1;
  std::vector<double> ways(static_cast<std::size_t>(span), 0.0);
  ways[static_cast<std::size_t>(n * k)] = 1.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> nxt(ways.size(), 0.0);
    for (int s = 0; s < span; ++s) {
      if (ways[static_cast<std::size_t>(s)] == 0.0) continue;
      for (int v = -k; v <= k; ++v) {
        const int t = s + v;
        if (t >= 0 && t < span) nxt[static_cast<std::size_t>(t)] += ways[static_cast<std::size_t>(s)];
      }
    }
    ways.swap(nxt);
  }
  const double c = ways[static_cast<std::size_t>(n * k)];
  return c > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(c);
}

NOpsVerification verify_truthfulness_n_ops(const DynamicParams& params, const UtilityModel& model,
                                           std::span<const TrafficSpec> traffic, double delta,
                                           std::size_t exact_limit, const MonteCarloOptions& mc) {
  params.validate();
  check_delta(delta);
  const int n = params.n;
  if (traffic.size() != static_cast<std::size_t>(n)) throw ContractViolation("need one traffic spec per operator");
  require_binary(traffic);
  for (int i = 0; i < n; ++i) {
    bool ok = false;
    for (int j = 0; j < n && !ok; ++j) {
      if (j != i) ok = traffic[static_cast<std::size_t>(i)].p_high() * (1.0 - traffic[static_cast<std::size_t>(j)].p_high()) > 0.0;
    }
    if (!ok) {
      throw HypothesisError("operator " + std::to_string(i + 1) +
                            " is never the higher-traffic operator of any pair; truthfulness hypotheses fail");
    }
  }

  NOpsVerification out;
  const double w = params.baseline();
  const double d = params.trade_mhz;
  out.fe_margin = 2.0 * (model.pi(w, 0.0) - model.pi(w - d, 0.0)) - (model.pi(w + d, 0.0) - model.pi(w - d, 0.0));
  const std::size_t balances = balance_state_count(n, params.k);
  const std::size_t patterns = std::size_t{1} << n;
  out.state_count = balances > std::numeric_limits<std::size_t>::max() / patterns
                        ? std::numeric_limits<std::size_t>::max()
                        : balances * patterns;

  auto finding = [&](const BalanceLedger& ledger, std::span<const int> lv, int op, const Slot& truth,
                     const Slot& lie) {
    const auto o = static_cast<std::size_t>(op);
    DeviationFinding f;
    f.state = describe_state(ledger.units(), params.trade_mhz, lv);
    f.kind = lv[o] == 0 ? DeviationKind::LieHigh : DeviationKind::LieLow;
    f.op = op;
    f.gain = (1.0 - delta) * (model.pi(lie.widths[o], lv[o]) - model.pi(truth.widths[o], lv[o]));
    f.event = lie_event(lv[o], role(truth.trades, op), role(lie.trades, op));
    return f;
  };

  if (out.state_count <= exact_limit) {
    out.mode = VerificationMode::Exact;
    const JointChain chain(params, model, traffic);
    const Eigen::MatrixXd v = chain.values(delta);
    for (std::size_t s = 0; s < chain.size(); ++s) {
      for (std::size_t p = 0; p < patterns; ++p) {
        if (chain.probability(p) == 0.0) continue;
        const auto lv = chain.levels(p);
        const auto truth = play(params, chain.state(s), lv);
        for (int op = 0; op < n; ++op) {
          auto reports = lv;
          reports[static_cast<std::size_t>(op)] = 1 - reports[static_cast<std::size_t>(op)];
          const auto lie = play(params, chain.state(s), reports);
          auto f = finding(chain.state(s), lv, op, truth, lie);
          f.loss = delta * (v(chain.index(truth.next), op) - v(chain.index(lie.next), op));
          f.profitable = f.gain - f.loss > kProfitTolerance;
          out.findings.push_back(std::move(f));
        }
      }
    }
    return out;
  }

  out.mode = VerificationMode::MonteCarlo;
  if (mc.sample_states < 1 || mc.rollouts < 2) throw ContractViolation("Monte Carlo needs states and rollouts");
  const int horizon = mc.horizon > 0 ? mc.horizon
                      : delta == 0.0 ? 1
                                     : static_cast<int>(std::ceil(std::log(1e-8) / std::log(delta)));
  auto draw = [&](std::uint64_t seed, std::uint64_t slot) {
    std::vector<int> lv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      lv[static_cast<std::size_t>(i)] = sample(traffic[static_cast<std::size_t>(i)], slot, static_cast<std::uint64_t>(i), seed) > 0.5;
    }
    return lv;
  };

  // States are visited by one truthful trajectory from the zero ledger.
  constexpr int kStride = 50;
  BalanceLedger ledger(n);
  std::uint64_t t = 0;
  for (int j = 0; j < mc.sample_states; ++j) {
    for (; t < static_cast<std::uint64_t>(j) * kStride; ++t) ledger = play(params, ledger, draw(mc.seed, t)).next;
    const auto lv = draw(mc.seed, t);
    const auto truth = play(params, ledger, lv);
    for (int op = 0; op < n; ++op) {
      auto reports = lv;
      reports[static_cast<std::size_t>(op)] = 1 - reports[static_cast<std::size_t>(op)];
      const auto lie = play(params, ledger, reports);
      auto f = finding(ledger, lv, op, truth, lie);
      if (truth.next == lie.next) {
        f.loss = 0.0;
      } else {
        double sum = 0.0;
        double sum_sq = 0.0;
        const std::uint64_t base = counter_hash(mc.seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(op));
        for (int r = 0; r < mc.rollouts; ++r) {
          const std::uint64_t seed = replication_seed(base, static_cast<std::uint64_t>(r));
          BalanceLedger bt = truth.next;
          BalanceLedger bl = lie.next;
          double disc = 1.0;
          double loss = 0.0;
          for (int s = 1; s <= horizon && !(bt == bl); ++s) {
            disc *= delta;
            const auto l = draw(seed, static_cast<std::uint64_t>(s));
            const auto st = play(params, bt, l);
            const auto sl = play(params, bl, l);
            const auto o = static_cast<std::size_t>(op);
            loss += (1.0 - delta) * disc * (model.pi(st.widths[o], l[o]) - model.pi(sl.widths[o], l[o]));
            bt = st.next;
            bl = sl.next;
          }
          sum += loss;
          sum_sq += loss * loss;
        }
        const double m = sum / mc.rollouts;
        const double var = std::max(0.0, (sum_sq - mc.rollouts * m * m) / (mc.rollouts - 1));
        f.loss = m;
        f.ci = kZ99 * std::sqrt(var / mc.rollouts);
      }
      f.profitable = f.gain - f.loss - f.ci > kProfitTolerance;
      out.findings.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<DeviationFinding> verify_static(const StaticParams& params, const UtilityModel& model,
                                            std::span<const TrafficSpec> traffic, double delta) {
  params.validate();
  check_delta(delta);
  if (traffic.size() != static_cast<std::size_t>(params.n)) throw ContractViolation("need one traffic spec per operator");
  std::vector<DeviationFinding> out;
  const double keep = params.grim ? delta : delta * (1.0 - std::pow(delta, params.punishment_slots));
  for (int i = 0; i < params.n; ++i) {
    const auto& spec = traffic[static_cast<std::size_t>(i)];
    const double w = params.shares[static_cast<std::size_t>(i)] * model.band();
    const double u_o = static_expected_utility(params, model, spec, i);
    const double u_f = expectation(spec, [&](double lam) { return full_spectrum_utility(params.n, lam, model); });
    for (const auto& lv : spec.support()) {
      if (lv.probability == 0.0) continue;
      DeviationFinding f;
      f.state = "cooperation traffic=" + fmt(lv.level);
      f.kind = DeviationKind::Detectable;
      f.op = i;
      f.gain = (1.0 - delta) * (model.upper_utility(lv.level) - model.pi(w, lv.level));
      f.loss = keep * (u_o - u_f);
      f.profitable = f.gain - f.loss > kProfitTolerance;
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<DeviationFinding> verify_entry(const EntryParams& params, const UtilityModel& model,
                                           const TrafficSpec& traffic, double delta) {
  check_delta(delta);
  const EntryPlan plan = EntryPlan::build(params, model, traffic);
  std::vector<DeviationFinding> out;
  if (plan.n_star >= 1) {
    DeviationFinding f;
    f.state = "arrival=" + std::to_string(plan.n_star) + " n_star=" + std::to_string(plan.n_star);
    f.kind = DeviationKind::StayOut;
    f.op = plan.n_star - 1;
    f.gain = params.cost;
    f.loss = u_f_of_n(plan.n_star, model, traffic);
    f.profitable = f.gain - f.loss > kProfitTolerance;
    out.push_back(std::move(f));
  }
  {
    DeviationFinding f;
    f.state = "arrival=" + std::to_string(plan.n_star + 1) + " n_star=" + std::to_string(plan.n_star);
    f.kind = DeviationKind::Enter;
    f.op = plan.n_star;
    f.gain = u_f_of_n(plan.n_star + 1, model, traffic);
    f.loss = params.cost;
    f.profitable = f.gain - f.loss > kProfitTolerance;
    out.push_back(std::move(f));
  }
  const int reachable = static_cast<int>(plan.punishment.size()) - 1;
  for (int n = 2; n <= reachable; ++n) {
    const std::vector<TrafficSpec> specs(static_cast<std::size_t>(n), traffic);
    for (auto f : verify_static(StaticParams::uniform(n, plan.punishment_for(n)), model, specs, delta)) {
      f.state = "n=" + std::to_string(n) + " " + f.state;
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace specshare
