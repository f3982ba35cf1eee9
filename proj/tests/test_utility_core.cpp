#include "oracles.hpp"

#include "specshare/errors.hpp"
#include "specshare/utility_model.hpp"

#include <doctest.h>

#include <random>

using namespace specshare;
using doctest::Approx;

namespace {

SpectrumAllocation alloc(double lo, double hi, double band = 100.0) { return SpectrumAllocation::block(lo, hi, band); }

}  // namespace

TEST_CASE("spectrum allocation invariants") {
  const SpectrumAllocation a({{0, 10}, {20, 30}}, 100.0);
  CHECK(a.width() == 20.0);
  CHECK(a.covers(5.0));
  CHECK_FALSE(a.covers(10.0));
  CHECK_FALSE(a.covers(15.0));
  CHECK_THROWS_AS(SpectrumAllocation({{0, 10}, {5, 30}}, 100.0), DomainError);
  CHECK_THROWS_AS(SpectrumAllocation({{20, 30}, {0, 10}}, 100.0), DomainError);
  CHECK_THROWS_AS(SpectrumAllocation({{0, 120}}, 100.0), DomainError);
  CHECK_THROWS_AS(SpectrumAllocation({{5, 5}}, 100.0), DomainError);
  CHECK(alloc(7, 7).empty());

  // adjacent pieces describe the same support as one block
  CHECK(SpectrumAllocation({{0, 30}, {30, 50}}, 100.0).same_support(alloc(0, 50)));
  CHECK_FALSE(alloc(0, 50).same_support(alloc(0, 50.000001)));
  CHECK(quantize_mhz(0.3 * 100.0) == 30.0);
}

TEST_CASE("rate") {
  const auto m = UtilityModel::linear(100.0, 100.0);
  CHECK(m.rate(0.0) == 0.0);
  CHECK(m.rate(1.0) == Approx(1.0).epsilon(1e-15));
  CHECK(m.rate(100.0) == Approx(oracle::shannon(100.0)).epsilon(1e-14));
  CHECK(m.rate(100.0) == Approx(6.6582).epsilon(1e-5));
  CHECK_THROWS_AS(m.rate(-1e-9), DomainError);

  double prev = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double r = m.rate(i * 0.5);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("tabulated rate is piecewise linear and extrapolates") {
  const UtilityModel m(100.0, 4.0, TabulatedRate{{0.0, 1.0, 3.0}, {0.0, 1.0, 2.0}}, LinearUtility{});
  CHECK(m.rate(0.5) == Approx(0.5));
  CHECK(m.rate(2.0) == Approx(1.5));
  CHECK(m.rate(4.0) == Approx(2.5));
  CHECK(m.rate_at_cap() == Approx(2.5));
  CHECK_THROWS_AS(UtilityModel(100.0, 4.0, TabulatedRate{{0.0, 1.0}, {0.0, 0.0}}, LinearUtility{}), ContractViolation);
  CHECK_THROWS_AS(UtilityModel(100.0, 4.0, TabulatedRate{{0.5, 1.0}, {0.0, 1.0}}, LinearUtility{}), ContractViolation);
  const auto check = check_interference_limited(m, 8);
  CHECK_FALSE(check.limit_evaluated);
}

TEST_CASE("sinr") {
  const auto m = UtilityModel::linear(100.0, 100.0);
  const auto op = alloc(0, 100);
  CHECK(sinr(op, {}, 50.0, m) == 100.0);
  const std::vector<SpectrumAllocation> one{alloc(0, 100)};
  CHECK(sinr(op, one, 50.0, m) == Approx(100.0 / 101.0).epsilon(1e-15));
  CHECK(sinr(alloc(0, 40), one, 50.0, m) == 0.0);
  CHECK_THROWS_AS(sinr(op, one, 100.0, m), DomainError);
  CHECK_THROWS_AS(sinr(op, one, -0.1, m), DomainError);
}

TEST_CASE("effective bandwidth examples") {
  const auto m = UtilityModel::linear(100.0, 100.0);
  CHECK(effective_bandwidth(alloc(0, 100), {}, m).value == 100.0);
  const std::vector<SpectrumAllocation> full{alloc(0, 100)};
  const double shared = effective_bandwidth(alloc(0, 100), full, m).value;
  CHECK(shared == Approx(oracle::shared_bandwidth(2, 100.0, 100.0)).epsilon(1e-13));
  CHECK(shared == Approx(14.912).epsilon(1e-4));
  const std::vector<SpectrumAllocation> upper{alloc(50, 100)};
  CHECK(effective_bandwidth(alloc(0, 50), upper, m).value == 50.0);
}

TEST_CASE("utility examples") {
  const auto lin = UtilityModel::linear(100.0, 100.0);
  const std::vector<SpectrumAllocation> full{alloc(0, 100)};
  const double both = utility(alloc(0, 100), full, 1.0, lin);
  CHECK(both == Approx(100.0 * oracle::shannon(100.0 / 101.0)).epsilon(1e-12));
  CHECK(both == Approx(99.284).epsilon(1e-5));
  CHECK(utility(alloc(0, 100), full, 0.0, lin) == 0.0);

  const auto cd = UtilityModel::cobb_douglas(100.0, 100.0);
  const double u = utility(alloc(0, 50), {}, 0.0, cd);
  CHECK(u == Approx(oracle::cd(50.0, 0.0, 100.0)).epsilon(1e-13));
  CHECK(u == Approx(186.25).epsilon(1e-4));
  CHECK(cd.pi(0.0, 1.0) == 0.0);
}

TEST_CASE("full-spectrum utility") {
  const auto lin = UtilityModel::linear(100.0, 100.0);
  CHECK(full_spectrum_utility(1, 1.0, lin) == Approx(lin.pi(100.0, 1.0)).epsilon(1e-15));
  CHECK(full_spectrum_utility(2, 1.0, lin) == Approx(99.284).epsilon(1e-5));
  CHECK_THROWS_AS(full_spectrum_utility(0, 1.0, lin), DomainError);

  const auto cd = UtilityModel::cobb_douglas(100.0, 100.0);
  for (const auto* m : {&lin, &cd}) {
    double prev = full_spectrum_utility(1, 1.0, *m);
    for (int n = 2; n <= 10; ++n) {
      const double v = full_spectrum_utility(n, 1.0, *m);
      CHECK(v < prev);
      prev = v;

      // same thing through the general integral
      const std::vector<SpectrumAllocation> all(static_cast<std::size_t>(n), alloc(0, 100));
      CHECK(utility(all[0], std::span(all).subspan(1), 1.0, *m) == Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("interference-limited threshold") {
  CHECK(check_interference_limited(UtilityModel::linear(100, 100.0)).holds);

  const auto low = check_interference_limited(UtilityModel::linear(100, 1.0));
  CHECK_FALSE(low.holds);
  REQUIRE(low.witness_n);
  CHECK(*low.witness_n == 2);

  // the pairwise threshold sits at the golden ratio
  CHECK(check_interference_limited(UtilityModel::linear(100, 1.63), 2, LimitTerm::Exclude).holds);
  CHECK_FALSE(check_interference_limited(UtilityModel::linear(100, 1.61), 2, LimitTerm::Exclude).holds);

  // every n together, limit 1/ln 2 included, moves it to e - 1
  const auto mid = check_interference_limited(UtilityModel::linear(100, 1.70));
  CHECK_FALSE(mid.holds);
  CHECK(mid.limit_violated);
  CHECK(mid.witness_n);
  CHECK(check_interference_limited(UtilityModel::linear(100, 1.73)).holds);
  CHECK(check_interference_limited(UtilityModel::linear(100, 1.70), 64, LimitTerm::Exclude).holds == false);
  CHECK_THROWS_AS(check_interference_limited(UtilityModel::linear(100, 10.0), 1), ContractViolation);
}

TEST_CASE("pi structural properties") {
  const std::vector<double> lams{0.0, 1.0};
  const auto cd = check_pi_properties_default(UtilityModel::cobb_douglas(100.0, 100.0), lams);
  CHECK(cd.holds());

  const auto lin = check_pi_properties_default(UtilityModel::linear(100.0, 100.0), lams);
  CHECK(lin.strictly_supermodular());
  CHECK_FALSE(lin.strictly_concave());
  REQUIRE(lin.first());

  const UtilityModel convex(100.0, 100.0, ShannonRate{}, CustomUtility{"lambda x^2", [](double x, double l) {
                                                                         return l * x * x;
                                                                       }});
  const std::vector<double> one{1.0};
  const auto c = check_pi_properties_default(convex, one);
  REQUIRE(c.concavity);
  CHECK(c.concavity->lhs > c.concavity->rhs);
}

TEST_CASE("effective bandwidth against a cell-by-cell oracle") {
  std::mt19937_64 rng(42);
  const auto m = UtilityModel::linear(60.0, 30.0);
  auto random_set = [&] {
    std::vector<oracle::Block> blocks;
    int at = 0;
    std::uniform_int_distribution<int> gap(0, 8), len(1, 12);
    while (true) {
      const int lo = at + gap(rng);
      const int hi = lo + len(rng);
      if (hi > 60) break;
      blocks.push_back({lo, hi});
      at = hi + 1;
    }
    return blocks;
  };
  auto to_alloc = [](const std::vector<oracle::Block>& b) {
    std::vector<Interval> iv;
    for (const auto& x : b) iv.push_back({double(x.lo), double(x.hi)});
    return SpectrumAllocation(std::span<const Interval>(iv), 60.0);
  };
  for (int trial = 0; trial < 300; ++trial) {
    const auto op = random_set();
    std::vector<std::vector<oracle::Block>> others;
    std::vector<SpectrumAllocation> other_allocs;
    const int n_others = trial % 4;
    for (int j = 0; j < n_others; ++j) {
      others.push_back(random_set());
      other_allocs.push_back(to_alloc(others.back()));
    }
    const double got = effective_bandwidth(to_alloc(op), other_allocs, m).value;
    CHECK(got == Approx(oracle::cell_bandwidth(op, others, 60, 30.0)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 60.0);
    if (n_others == 0) CHECK(got == to_alloc(op).width());
  }
}

TEST_CASE("more interference never raises effective bandwidth") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  const auto m = UtilityModel::cobb_douglas(100.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = quantize_mhz(u(rng)), b = quantize_mhz(u(rng));
    const auto op = alloc(std::min(a, b), std::max(a, b));
    std::vector<SpectrumAllocation> others;
    double prev = effective_bandwidth(op, others, m).value;
    for (int j = 0; j < 4; ++j) {
      const double c = quantize_mhz(u(rng)), d = quantize_mhz(u(rng));
      others.push_back(alloc(std::min(c, d), std::max(c, d)));
      const double now = effective_bandwidth(op, others, m).value;
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
    // growing one interferer to the whole band
    const auto before = effective_bandwidth(op, others, m).value;
    others.back() = alloc(0, 100);
    CHECK(effective_bandwidth(op, others, m).value <= before + 1e-12);
  }
}

TEST_CASE("splitting an interval leaves effective bandwidth unchanged") {
  const auto m = UtilityModel::linear(100.0, 100.0);
  const std::vector<SpectrumAllocation> others{alloc(10, 70), alloc(35, 90)};
  const double whole = effective_bandwidth(alloc(5, 80), others, m).value;
  for (double cut : {6.0, 10.0, 22.5, 35.0, 55.25, 79.0}) {
    const SpectrumAllocation split({{5, cut}, {cut, 80}}, 100.0);
    CHECK(effective_bandwidth(split, others, m).value == Approx(whole).epsilon(1e-12));
  }
}

TEST_CASE("uniform partition beats full-spectrum sharing when interference-limited") {
  for (double p : {2.0, 10.0, 100.0, 1000.0}) {
    for (const auto& m : {UtilityModel::linear(100.0, p), UtilityModel::cobb_douglas(100.0, p)}) {
      if (!check_interference_limited(m).holds) continue;
      for (int n = 2; n <= 10; ++n) {
        for (double lam : {0.0, 0.5, 1.0}) {
          if (lam == 0.0 && std::holds_alternative<LinearUtility>(m.family())) continue;  // both zero
          CHECK(m.pi(100.0 / n, lam) > full_spectrum_utility(n, lam, m));
        }
      }
    }
  }
}
