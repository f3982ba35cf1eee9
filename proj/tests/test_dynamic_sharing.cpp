#include "oracles.hpp"

#include "specshare/dynamic_sharing.hpp"
#include "specshare/errors.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace specshare;
using doctest::Approx;

namespace {

DynamicParams two_ops(int k = 2, int T = 2) { return DynamicParams{2, 100.0, 10.0, k, T}; }

std::vector<double> widths_of(const std::vector<SpectrumAllocation>& a) {
  std::vector<double> w;
  for (const auto& x : a) w.push_back(x.width());
  return w;
}

}  // namespace

TEST_CASE("params") {
  const auto p = DynamicParams::from_cap(4, 100.0, 10.0, 20.0, 3);
  CHECK(p.k == 2);
  CHECK(p.baseline() == 25.0);
  CHECK(p.balance_cap() == 20.0);
  CHECK_THROWS_AS(DynamicParams::from_cap(4, 100.0, 10.0, 25.0, 3), ContractViolation);
  CHECK_THROWS_AS(DynamicParams::from_cap(4, 100.0, 30.0, 30.0, 3), ContractViolation);
  CHECK_THROWS_AS(DynamicParams::from_cap(2, 100.0, 10.0, 0.0, 3), ContractViolation);
  CHECK_THROWS_AS(DynamicParams::from_cap(2, 100.0, 10.0, 10.0, 0), ContractViolation);
  CHECK_THROWS_AS(DynamicParams::from_cap(1, 100.0, 10.0, 10.0, 1), ContractViolation);
  CHECK_NOTHROW(DynamicParams::from_cap(2, 100.0, 50.0, 50.0, 1));
  CHECK_THROWS_AS(BalanceLedger(std::vector{1, 0}), ContractViolation);
}

TEST_CASE("policy Q examples") {
  const DynamicParams p{4, 100.0, 10.0, 2, 1};
  // A1 = {op1, op2}, A0 = {op3}; op4 sits at the cap and cannot lend
  const BalanceLedger ledger{std::vector{-1, 0, -1, 2}};
  const std::vector<int> reports{1, 1, 0, 0};
  const auto trades = trading_policy_q(reports, ledger, p);
  REQUIRE(trades.size() == 1);
  CHECK(trades[0] == Trade{1, 2});

  const std::vector<int> quiet{0, 0, 0, 0};
  CHECK(trading_policy_q(quiet, ledger, p).empty());

  const std::vector<int> r10{1, 0};
  const auto two = trading_policy_q(r10, BalanceLedger(2), two_ops());
  REQUIRE(two.size() == 1);
  CHECK(two[0] == Trade{0, 1});

  // equal balances pair in operator order
  const std::vector<int> r{0, 1, 0, 1};
  const auto tied = trading_policy_q(r, BalanceLedger(4), p);
  REQUIRE(tied.size() == 2);
  CHECK(tied[0] == Trade{1, 0});
  CHECK(tied[1] == Trade{3, 2});

  const std::vector<int> bad{2, 0, 0, 0};
  CHECK_THROWS_AS(trading_policy_q(bad, ledger, p), ContractViolation);
}

TEST_CASE("dynamic step examples") {
  const auto p = two_ops();
  auto s = DynamicState::initial(2);

  const std::vector<int> r10{1, 0}, r11{1, 1};
  auto a = dynamic_step(p, s, r10, {});
  CHECK(widths_of(a.allocations) == std::vector{60.0, 40.0});
  CHECK(a.next.ledger == BalanceLedger(std::vector{-1, 1}));
  CHECK(a.allocations[0] == SpectrumAllocation::block(0, 60, 100));

  auto b = dynamic_step(p, a.next, r11, a.allocations);
  CHECK(widths_of(b.allocations) == std::vector{50.0, 50.0});
  CHECK(b.next.ledger == a.next.ledger);

  DynamicState capped{PhaseState::start(), BalanceLedger(std::vector{-2, 2}), {}};
  auto c = dynamic_step(p, capped, r10, {});
  CHECK(c.trades.empty());
  CHECK(widths_of(c.allocations) == std::vector{50.0, 50.0});

  CHECK_THROWS_AS(dynamic_step(p, s, std::vector{1, 0, 0}, {}), ContractViolation);
  CHECK_THROWS_AS(dynamic_step(p, a.next, r10, {}), ContractViolation);
}

TEST_CASE("a support mismatch freezes the ledger for T slots") {
  const auto p = two_ops(2, 3);
  const std::vector<int> r10{1, 0};
  auto a = dynamic_step(p, DynamicState::initial(2), r10, {});
  const auto frozen = a.next.ledger;

  std::vector<SpectrumAllocation> observed = a.allocations;
  observed[1] = SpectrumAllocation::full_band(100.0);
  auto s = dynamic_step(p, a.next, r10, observed);
  CHECK(s.punishing);
  CHECK(s.trades.empty());
  for (int t = 0; t < 2; ++t) {
    s = dynamic_step(p, s.next, r10, s.allocations);
    CHECK(s.punishing);
    CHECK(s.next.ledger == frozen);
  }
  s = dynamic_step(p, s.next, r10, {});
  CHECK_FALSE(s.punishing);
  CHECK(s.next.ledger == BalanceLedger(std::vector{-2, 2}));
}

TEST_CASE("ledger and allocation invariants under random reports") {
  std::mt19937_64 rng(99);
  for (int n : {2, 3, 5, 8}) {
    for (int k : {1, 3}) {
      const DynamicParams p{n, 120.0, 120.0 / n / 2.0, k, 2};
      auto s = DynamicState::initial(n);
      std::vector<SpectrumAllocation> last;
      const int slots = n == 2 ? 100'000 : 20'000;
      for (int t = 0; t < slots; ++t) {
        std::vector<int> rep(static_cast<std::size_t>(n));
        for (auto& r : rep) r = static_cast<int>(rng() & 1u);
        auto st = dynamic_step(p, s, rep, last);
        const auto& u = st.next.ledger.units();
        CHECK(std::accumulate(u.begin(), u.end(), 0) == 0);
        for (int b : u) CHECK(std::abs(b) <= k);

        // trades = min(|A1|, |A0|), each borrower gets w + Delta
        int a1 = 0, a0 = 0;
        for (int i = 0; i < n; ++i) {
          const int b = s.ledger.units(i);
          a1 += rep[static_cast<std::size_t>(i)] == 1 && b >= -k + 1;
          a0 += rep[static_cast<std::size_t>(i)] == 0 && b <= k - 1;
        }
        CHECK(st.trades.size() == static_cast<std::size_t>(std::min(a1, a0)));

        double lo = 0.0, total = 0.0;
        for (std::size_t i = 0; i < st.allocations.size(); ++i) {
          const auto iv = st.allocations[i].intervals();
          REQUIRE(iv.size() == 1);
          CHECK(iv[0].lo == lo);
          lo = iv[0].hi;
          total += st.allocations[i].width();
        }
        CHECK(lo == 120.0);
        CHECK(total == Approx(120.0).epsilon(1e-12));
        for (const auto& tr : st.trades) {
          CHECK(tr.borrower != tr.lender);
          CHECK(st.allocations[static_cast<std::size_t>(tr.borrower)].width() ==
                Approx(p.baseline() + p.trade_mhz).epsilon(1e-9));
          CHECK(st.allocations[static_cast<std::size_t>(tr.lender)].width() ==
                Approx(p.baseline() - p.trade_mhz).epsilon(1e-9));
        }
        last = st.allocations;
        s = st.next;
      }
    }
  }
}

TEST_CASE("three-state balance occupancy matches the exact chain") {
  const auto p = two_ops(1);
  const double p1 = 0.25, p2 = 0.5;
  std::mt19937_64 rng(5);
  std::bernoulli_distribution h1(p1), h2(p2);
  auto s = DynamicState::initial(2);
  std::vector<SpectrumAllocation> last;
  constexpr int kSlots = 400'000;
  std::array<int, 3> count{};
  for (int t = 0; t < kSlots; ++t) {
    const std::vector<int> rep{h1(rng) ? 1 : 0, h2(rng) ? 1 : 0};
    auto st = dynamic_step(p, s, rep, last);
    last = st.allocations;
    s = st.next;
    ++count[static_cast<std::size_t>(s.ledger.units(0) + 1)];
  }
  const auto mu = oracle::birth_death(1, (1 - p1) * p2, p1 * (1 - p2));
  for (std::size_t b = 0; b < 3; ++b) {
    // a generous bound for a correlated chain sample
    const double se = std::sqrt(mu[b] * (1 - mu[b]) / kSlots) * 4.0;
    CHECK(std::abs(double(count[b]) / kSlots - mu[b]) < 4 * se);
  }
}

TEST_CASE("tiling keeps disjoint contiguous blocks") {
  const std::vector<double> w{33.3333333, 33.3333333, 33.3333334};
  const auto t = tile_widths(100.0, w);
  CHECK(t[2].intervals()[0].hi == 100.0);
  CHECK(t[0].intervals()[0].hi == t[1].intervals()[0].lo);
  CHECK(t[1].intervals()[0].hi == t[2].intervals()[0].lo);
}
