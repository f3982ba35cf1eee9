#include "oracles.hpp"

#include "specshare/balance_chain.hpp"
#include "specshare/delta_selection.hpp"
#include "specshare/errors.hpp"
#include "specshare/verifier.hpp"

#include <doctest.h>

#include <map>

using namespace specshare;
using doctest::Approx;

namespace {

const auto kCd100 = UtilityModel::cobb_douglas(100.0, 100.0);
const auto kCd1000 = UtilityModel::cobb_douglas(100.0, 1000.0);

std::vector<TrafficSpec> pair_traffic(double p1, double p2) {
  return {TrafficSpec::two_level(p1), TrafficSpec::two_level(p2)};
}

int count_profitable(std::span<const DeviationFinding> f) {
  return static_cast<int>(std::count_if(f.begin(), f.end(), [](const auto& x) { return x.profitable; }));
}

// Future loss of operator 1 by propagating the joint law of the truthful and
// lying balances slot by slot and summing utility differences.
double pair_loss_oracle(const oracle::TwoOp& c, double power, double delta, int start, int horizon) {
  std::map<std::pair<int, int>, double> law{{{start, start - 1}, 1.0}};
  const double pl[2][2] = {{(1 - c.p1) * (1 - c.p2), (1 - c.p1) * c.p2}, {c.p1 * (1 - c.p2), c.p1 * c.p2}};
  double total = 0.0, disc = 1.0;
  for (int t = 1; t <= horizon; ++t) {
    disc *= delta;
    std::map<std::pair<int, int>, double> next;
    for (const auto& [st, m] : law) {
      for (int l1 = 0; l1 < 2; ++l1) {
        for (int l2 = 0; l2 < 2; ++l2) {
          int nx = 0, ny = 0;
          const double wx = oracle::widths(c, st.first, l1, l2, &nx).first;
          const double wy = oracle::widths(c, st.second, l1, l2, &ny).first;
          const double pr = m * pl[l1][l2];
          total += disc * pr * (oracle::cd(wx, l1, power) - oracle::cd(wy, l1, power));
          if (nx != ny) next[{nx, ny}] += pr;
        }
      }
    }
    law.swap(next);
  }
  return total;
}

}  // namespace

TEST_CASE("lying gain examples") {
  const DynamicParams p{2, 100.0, 10.0, 2, 1};
  const double g = lying_gain(0, 0, 0, p, kCd100);
  CHECK(g == Approx(oracle::cd(60, 0, 100) - oracle::cd(50, 0, 100)).epsilon(1e-12));
  CHECK(g == Approx(33.2).epsilon(2e-3));
  CHECK(lying_gain(0, 0, -2, p, kCd100) == 0.0);

  // lying low at (1,1) turns operator 1 into the lender
  CHECK(lying_gain(1, 1, 0, p, kCd100) == Approx(oracle::cd(40, 1, 100) - oracle::cd(50, 1, 100)));
  CHECK(lying_gain(1, 0, 0, p, kCd100) == Approx(oracle::cd(50, 1, 100) - oracle::cd(60, 1, 100)));
  // at the lending cap the lie changes nothing
  CHECK(lying_gain(1, 1, 2, p, kCd100) == 0.0);
  CHECK(lying_gain(0, 1, 0, p, kCd100) == Approx(oracle::cd(50, 0, 100) - oracle::cd(40, 0, 100)));
  CHECK(lying_gain(0, 1, 0, p, kCd100, 1) < 0.0);
  CHECK(lying_gain(0, 0, 0, p, kCd100, 1) == Approx(g));
  CHECK_THROWS_AS(lying_gain(0, 0, 3, p, kCd100), ContractViolation);
}

TEST_CASE("trade-size condition") {
  CHECK(check_trade_condition(kCd100, 50, 10));
  const double lhs = oracle::cd(50, 0, 100) - oracle::cd(40, 0, 100);
  const double rhs = oracle::cd(60, 1, 100) - oracle::cd(50, 1, 100);
  CHECK(trade_condition_margin(kCd100, 50, 10) == Approx(rhs - lhs).epsilon(1e-12));
  CHECK(check_trade_condition(kCd100, 50, 0.5));
  // Linear: pi(., 0) is 0, so the margin is the lambda = 1 increment
  const auto lin = UtilityModel::linear(100, 100);
  CHECK(trade_condition_margin(lin, 50, 10) == Approx(oracle::linear(10, 1, 100)));
}

TEST_CASE("value function") {
  const DynamicParams p{2, 100.0, 10.0, 5, 1};
  const auto traffic = JointTraffic2::product(TrafficSpec::two_level(0.25), TrafficSpec::two_level(0.5));
  const BalanceChain chain(p, kCd100, traffic);

  // kernel rows are distributions and never leave the caps
  for (int i = 0; i < chain.size(); ++i) CHECK(chain.kernel().row(i).sum() == Approx(1.0).epsilon(1e-14));

  const auto v0 = value_function(chain, 0.0);
  CHECK((v0.values - chain.rewards()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(value_function(chain, 1.0), DomainError);

  const auto v = value_function(chain, 0.99);
  CHECK(v.residual < 1e-10);
  const double a = oracle::cd(60, 1, 100) - oracle::cd(50, 1, 100);
  for (int b = -5; b < 5; ++b) {
    CHECK(v.at(0, b + 1) >= v.at(0, b));
    CHECK(v.at(0, b + 1) - v.at(0, b) <= a);
    CHECK(v.at(1, b) >= v.at(1, b + 1));
  }

  // no trades possible: every balance is worth E[pi(w, Lambda)]
  const BalanceChain still(p, kCd100, JointTraffic2::from_table(0.5, 0.0, 0.0, 0.5));
  const auto vs = value_function(still, 0.9);
  const double flat = 0.5 * oracle::cd(50, 0, 100) + 0.5 * oracle::cd(50, 1, 100);
  for (int b = -5; b <= 5; ++b) CHECK(vs.at(0, b) == Approx(flat).epsilon(1e-12));
  const auto mu0 = stationary_distribution(still);
  CHECK(mu0(5) == 1.0);
}

TEST_CASE("value function against Monte Carlo rollouts") {
  const DynamicParams p{2, 100.0, 10.0, 5, 1};
  const oracle::TwoOp c{50, 10, 5, 0.25, 0.5};
  const BalanceChain chain(p, kCd100, JointTraffic2::product(TrafficSpec::two_level(0.25), TrafficSpec::two_level(0.5)));
  const double delta = 0.95;
  const auto v = value_function(chain, delta);
  auto pi = [](double x, int l) { return oracle::cd(x, l, 100); };
  for (int b : {-5, 0, 3, 5}) {
    for (int op : {0, 1}) {
      const auto est = oracle::rollout_value(c, pi, b, delta, 500, 4000, 11 + static_cast<std::uint64_t>(b + 10 * op), op);
      CHECK(std::abs(est.mean - v.at(op, b)) < 3.0 * est.se + 1e-9);
    }
  }
}

TEST_CASE("stationary sum revenue against the birth-death law") {
  for (int k : {1, 2, 5}) {
    for (auto [p1, p2] : {std::pair{0.25, 0.5}, std::pair{0.5, 0.5}, std::pair{0.7, 0.2}}) {
      const DynamicParams p{2, 100.0, 10.0, k, 1};
      const oracle::TwoOp c{50, 10, k, p1, p2};
      const auto mu = oracle::birth_death(k, (1 - p1) * p2, p1 * (1 - p2));
      double expect = 0.0;
      for (int b = -k; b <= k; ++b) {
        for (int l1 = 0; l1 < 2; ++l1) {
          for (int l2 = 0; l2 < 2; ++l2) {
            int nb = 0;
            const auto [w1, w2] = oracle::widths(c, b, l1, l2, &nb);
            const double pr = (l1 ? p1 : 1 - p1) * (l2 ? p2 : 1 - p2);
            expect += mu[static_cast<std::size_t>(b + k)] * pr *
                      (oracle::cd(w1, l1, 1000) + oracle::cd(w2, l2, 1000));
          }
        }
      }
      const auto traffic = pair_traffic(p1, p2);
      CHECK(dynamic_sum_revenue(p, kCd1000, traffic) == Approx(expect).epsilon(1e-10));
      const BalanceChain chain(p, kCd1000, joint_traffic(traffic));
      const auto dist = stationary_distribution(chain);
      for (int b = -k; b <= k; ++b) CHECK(dist(b + k) == Approx(mu[static_cast<std::size_t>(b + k)]).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact truthfulness check") {
  const auto traffic = pair_traffic(0.25, 0.5);
  const DynamicParams certified{2, 100.0, 50.0, 1, 4};
  CHECK(count_profitable(verify_truthfulness_exact(certified, kCd1000, traffic, 0.99)) == 0);

  // a myopic operator lies high at (0,0) when it can still borrow
  const auto myopic = verify_truthfulness_exact(DynamicParams{2, 100.0, 10.0, 2, 1}, kCd100, traffic, 0.0);
  bool lie_high_00 = false;
  for (const auto& f : myopic) {
    if (f.profitable && f.kind == DeviationKind::LieHigh && f.state.find("traffic=(0;0)") != std::string::npos) {
      lie_high_00 = true;
    }
    CHECK(f.profitable == (f.gain - f.loss > kProfitTolerance));
  }
  CHECK(lie_high_00);

  // Linear pi(., 0) = 0: there is nothing to gain in a low-traffic slot
  const auto lin = verify_truthfulness_exact(DynamicParams{2, 100.0, 10.0, 2, 1}, UtilityModel::linear(100, 100),
                                             traffic, 0.0);
  CHECK(count_profitable(lin) == 0);

  const auto one_sided = pair_traffic(0.0, 0.5);
  CHECK_THROWS_AS(verify_truthfulness_exact(certified, kCd1000, one_sided, 0.99), HypothesisError);
  const std::vector<TrafficSpec> odd{TrafficSpec::finite_levels({{0.0, 0.5}, {2.0, 0.5}}), TrafficSpec::two_level(0.5)};
  CHECK_THROWS_AS(verify_truthfulness_exact(certified, kCd1000, odd, 0.99), DomainError);
}

TEST_CASE("lying loss against pair propagation") {
  for (int k : {1, 2, 4}) {
    for (double delta : {0.5, 0.9, 0.99}) {
      for (auto [p1, p2] : {std::pair{0.25, 0.5}, std::pair{0.6, 0.3}}) {
        const DynamicParams p{2, 100.0, 10.0, k, 1};
        const oracle::TwoOp c{50, 10, k, p1, p2};
        const auto traffic = JointTraffic2::product(TrafficSpec::two_level(p1), TrafficSpec::two_level(p2));
        for (int b = -k + 1; b <= k; ++b) {
          const auto got = lying_loss_bound(p, kCd100, traffic, delta, b);
          const double want = pair_loss_oracle(c, 100, delta, b, 4000);
          CHECK(got.value == Approx(want).epsilon(1e-10));
          CHECK(got.tail >= 0.0);
          CHECK(got.tail < 1e-8);
        }
      }
    }
  }
  const DynamicParams p{2, 100.0, 10.0, 1, 1};
  const auto traffic = JointTraffic2::product(TrafficSpec::two_level(0.25), TrafficSpec::two_level(0.5));
  CHECK(lying_loss_bound(p, kCd100, traffic, 0.0, 0).value == 0.0);
  CHECK_THROWS_AS(lying_loss_bound(p, kCd100, traffic, 0.5, -1), ContractViolation);
}

TEST_CASE("lying loss for k = 1 in closed form") {
  // Truth starts at x0 in {0, 1}, the lie a unit below. Merges happen at the
  // first (1,0) slot while at 0 (loss A) or first (0,1) slot while at 1 (loss B).
  const auto traffic = JointTraffic2::from_table(0.1, 0.45, 0.3, 0.15);
  const double p = traffic.p10(), q = traffic.p01();
  const DynamicParams params{2, 100.0, 10.0, 1, 1};
  const double A = oracle::cd(60, 1, 100) - oracle::cd(50, 1, 100);
  const double B = oracle::cd(50, 0, 100) - oracle::cd(40, 0, 100);
  for (double d : {0.3, 0.9, 0.999}) {
    // f0 = d (p A + q f1 + (1-p-q) f0), f1 = d (q B + p f0 + (1-p-q) f1)
    const double s = 1.0 - d * (1.0 - p - q);
    const double f0 = (d * p * A * s + d * d * q * q * B) / (s * s - d * d * p * q);
    const double f1 = (d * q * B + d * p * f0) / s;
    CHECK(lying_loss_bound(params, kCd100, traffic, d, 0).value == Approx(f0).epsilon(1e-10));
    CHECK(lying_loss_bound(params, kCd100, traffic, d, 1).value == Approx(f1).epsilon(1e-10));

    // same number from the value table: L = d (V(x0) - V(x0 - 1)) / (1 - d)
    const BalanceChain chain(params, kCd100, traffic);
    const auto v = value_function(chain, d);
    CHECK(d * (v.at(0, 0) - v.at(0, -1)) / (1 - d) == Approx(f0).epsilon(1e-8));
  }
}

TEST_CASE("lying loss approaches a bracketed limit as delta -> 1") {
  const DynamicParams p{2, 100.0, 10.0, 3, 1};
  const auto traffic = JointTraffic2::product(TrafficSpec::two_level(0.25), TrafficSpec::two_level(0.5));
  const double lo = oracle::cd(50, 0, 100) - oracle::cd(40, 0, 100);
  const double hi = oracle::cd(60, 1, 100) - oracle::cd(50, 1, 100);
  for (int b = -2; b <= 3; ++b) {
    const double L = lying_loss_bound(p, kCd100, traffic, 0.9999, b).value;
    CHECK(L > lo * 0.999);
    CHECK(L < hi);
  }
}

TEST_CASE("loss exceeds gain at slack balances for delta near 1") {
  const auto traffic = JointTraffic2::product(TrafficSpec::two_level(0.25), TrafficSpec::two_level(0.5));
  const DynamicParams p{2, 100.0, 10.0, 3, 1};
  REQUIRE(check_trade_condition(kCd100, 50, 10));
  double delta0 = 1.0;
  for (double delta : {0.999, 0.99, 0.9}) {
    bool all = true;
    for (int b = -p.k + 1; b <= p.k; ++b) {
      // lying high at traffic (0, l2) gains one unit, leaving the lie's balance one lower
      const double g = std::max(lying_gain(0, 0, b, p, kCd100), lying_gain(0, 1, b, p, kCd100));
      all = all && lying_loss_bound(p, kCd100, traffic, delta, b).value > g;
    }
    if (delta == 0.999) CHECK(all);
    if (all) delta0 = delta;
  }
  MESSAGE("smallest swept delta with L > G everywhere: " << delta0);
}

TEST_CASE("punishment bound terms") {
  const DynamicParams p{2, 100.0, 10.0, 5, 1};
  const auto lin = UtilityModel::linear(100, 100);
  const auto z = punishment_bound_terms(p, lin);
  CHECK(z.z1 == Approx(399.5).epsilon(1e-4));
  CHECK(z.z2 == Approx(665.8).epsilon(1e-4));
  CHECK(z.z3 == 0.0);
  const auto half = pair_traffic(0.5, 0.5);
  CHECK_THROWS_AS(min_punishment_dynamic(p, lin, half, 0.99), InfeasibleError);

  const auto zc = punishment_bound_terms(p, kCd100);
  const double z1 = std::max(oracle::cd(100, 1, 100) - oracle::cd(40, 1, 100), oracle::cd(100, 0, 100) - oracle::cd(40, 0, 100));
  const double z2 = 10 * (oracle::cd(60, 1, 100) - oracle::cd(50, 1, 100));
  const double z3 = oracle::cd(40, 0, 100) - oracle::cd(oracle::shared_bandwidth(2, 100, 100), 0, 100);
  CHECK(zc.z1 == Approx(z1).epsilon(1e-12));
  CHECK(zc.z2 == Approx(z2).epsilon(1e-12));
  CHECK(zc.z3 == Approx(z3).epsilon(1e-12));
  const auto sizing = min_punishment_dynamic(p, kCd100, half, 0.99);
  CHECK(sizing.route == PunishmentRoute::Bound);
  CHECK(sizing.T == oracle::scan_T(z1 + z2, z3));

  // the bound T deters every detectable deviation once delta is close to 1
  DynamicParams with_t = p;
  with_t.punishment_slots = sizing.T;
  CHECK(count_profitable(verify_detectable_dynamic(with_t, kCd100, half, 0.999)) == 0);

  // small Delta, k = 1: T approaches z1 / z3
  const DynamicParams tiny{2, 100.0, 0.01, 1, 1};
  const auto zt = punishment_bound_terms(tiny, kCd100);
  CHECK(zt.z2 < 1e-3 * zt.z1);
  CHECK(min_punishment_dynamic(tiny, kCd100, half, 0.99).T == static_cast<int>(std::floor((zt.z1 + zt.z2) / zt.z3)) + 1);
}

TEST_CASE("punishment length through the exact route") {
  // At Delta = w the lender has no spectrum left, so z3 < 0 and the exact check decides.
  const auto traffic = pair_traffic(0.25, 0.5);
  const DynamicParams p{2, 100.0, 50.0, 1, 1};
  const auto sizing = min_punishment_dynamic(p, kCd1000, traffic, 0.99);
  CHECK(sizing.route == PunishmentRoute::Exact);
  CHECK(sizing.terms.z3 < 0.0);
  DynamicParams at = p;
  at.punishment_slots = sizing.T;
  CHECK(count_profitable(verify_detectable_dynamic(at, kCd1000, traffic, 0.99)) == 0);
  if (sizing.T > 1) {
    at.punishment_slots = sizing.T - 1;
    CHECK(count_profitable(verify_detectable_dynamic(at, kCd1000, traffic, 0.99)) > 0);
  }
}

TEST_CASE("n-operator truthfulness") {
  const std::vector<TrafficSpec> three{TrafficSpec::two_level(0.25), TrafficSpec::two_level(0.5),
                                       TrafficSpec::two_level(0.4)};
  const DynamicParams p3{3, 90.0, 30.0, 1, 1};
  const auto r3 = verify_truthfulness_n_ops(p3, UtilityModel::cobb_douglas(90.0, 1000.0), three, 0.99);
  CHECK(r3.mode == VerificationMode::Exact);
  CHECK(r3.state_count == balance_state_count(3, 1) * 8);
  CHECK(count_profitable(r3.findings) == 0);

  // two operators agree with the dedicated check
  const auto two = pair_traffic(0.25, 0.5);
  const DynamicParams p2{2, 100.0, 50.0, 1, 4};
  const auto a = verify_truthfulness_n_ops(p2, kCd1000, two, 0.99);
  const auto b = verify_truthfulness_exact(p2, kCd1000, two, 0.99);
  REQUIRE(a.findings.size() == b.size());
  std::map<std::pair<std::string, int>, const DeviationFinding*> by_state;
  for (const auto& f : b) by_state[{f.state, f.op}] = &f;
  for (const auto& f : a.findings) {
    const auto it = by_state.find({f.state, f.op});
    REQUIRE(it != by_state.end());
    CHECK(f.gain == Approx(it->second->gain).epsilon(1e-12));
    CHECK(f.loss == Approx(it->second->loss).epsilon(1e-9));
    CHECK(f.profitable == it->second->profitable);
  }

  CHECK(balance_state_count(2, 3) == 7);
  CHECK(balance_state_count(3, 1) == 7);
  CHECK(balance_state_count(6, 4) * 64 > kDefaultExactLimit);

  const std::vector<TrafficSpec> never{TrafficSpec::two_level(0.0), TrafficSpec::two_level(0.0),
                                       TrafficSpec::two_level(0.5)};
  CHECK_THROWS_AS(verify_truthfulness_n_ops(p3, kCd1000, never, 0.99), HypothesisError);
}

TEST_CASE("n-operator truthfulness by Monte Carlo") {
  const std::vector<TrafficSpec> six(6, TrafficSpec::two_level(0.4));
  const DynamicParams p{6, 120.0, 5.0, 4, 1};
  MonteCarloOptions mc;
  mc.sample_states = 6;
  mc.rollouts = 200;
  mc.horizon = 1000;
  const auto model = UtilityModel::cobb_douglas(120.0, 1000.0);
  const auto r = verify_truthfulness_n_ops(p, model, six, 0.99, kDefaultExactLimit, mc);
  CHECK(r.mode == VerificationMode::MonteCarlo);
  CHECK(r.findings.size() == 36);
  CHECK(count_profitable(r.findings) == 0);
  CHECK(r.fe_margin > 0.0);
  bool has_ci = false;
  for (const auto& f : r.findings) has_ci = has_ci || f.ci > 0.0;
  CHECK(has_ci);
}

TEST_CASE("static and entry verification") {
  const auto lin = UtilityModel::linear(100, 100);
  const std::vector<TrafficSpec> half(2, TrafficSpec::two_level(0.5));
  CHECK(count_profitable(verify_static(StaticParams::uniform(2, 3), lin, half, 0.999)) == 0);
  CHECK(count_profitable(verify_static(StaticParams::uniform(2, 2), lin, half, 0.999)) > 0);
  CHECK(count_profitable(verify_static(StaticParams::uniform(2, 1, true), lin, half, 0.99)) == 0);
  CHECK(count_profitable(verify_static(StaticParams::uniform(2, 3), lin, half, 0.5)) > 0);

  const auto e = verify_entry(EntryParams{40.0, {0, 10, 20}}, lin, TrafficSpec::two_level(0.5), 0.999);
  CHECK(count_profitable(e) == 0);
  CHECK(e[0].kind == DeviationKind::StayOut);
  CHECK(e[1].kind == DeviationKind::Enter);
  CHECK(e[1].gain == Approx(oracle::linear_uf(3, 100, 100, 0.5)));
}

TEST_CASE("Delta selection") {
  const auto traffic = pair_traffic(0.25, 0.5);
  const auto choice = choose_delta(100.0, 50.0, kCd1000, traffic, 0.99);
  CHECK(choice.certified);
  CHECK(choice.params.trade_mhz == 50.0);

  // exhaustive grid oracle: the winner is the best certified candidate
  double best = -1.0;
  for (const auto& c : choice.candidates) {
    CHECK(std::fmod(50.0, c.trade_mhz) == 0.0);
    if (c.certified()) best = std::max(best, c.sum_revenue);
    const DynamicParams p = DynamicParams::from_cap(2, 100.0, c.trade_mhz, 50.0, 1);
    CHECK(c.sum_revenue == Approx(dynamic_sum_revenue(p, kCd1000, traffic)).epsilon(1e-12));
  }
  CHECK(choice.sum_revenue == best);

  const auto quiet = pair_traffic(0.0, 0.0);
  const auto q = choose_delta(100.0, 50.0, kCd1000, quiet, 0.99);
  CHECK_FALSE(q.certified);
  CHECK(q.params.trade_mhz == 1.0);
  CHECK_FALSE(q.note.empty());

  CHECK_THROWS_AS(choose_delta(100.0, 50.0, kCd1000, traffic, 0.0), InfeasibleError);
}
