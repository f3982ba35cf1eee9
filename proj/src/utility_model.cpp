#include "specshare/utility_model.hpp"

#include "specshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace specshare {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate_table(const TabulatedRate& t) {
  if (t.gamma.size() != t.rate.size() || t.gamma.size() < 2) {
    throw ContractViolation("rate table needs at least two (gamma, rate) knots");
  }
  if (t.gamma.front() != 0.0) throw ContractViolation("rate table must start at gamma = 0");
  for (std::size_t i = 1; i < t.gamma.size(); ++i) {
    if (!(t.gamma[i] > t.gamma[i - 1]) || !(t.rate[i] > t.rate[i - 1])) {
      throw ContractViolation("rate table must be strictly increasing");
    }
  }
}

double table_rate(const TabulatedRate& t, double g) {
  auto it = std::upper_bound(t.gamma.begin(), t.gamma.end(), g);
  std::size_t hi = static_cast<std::size_t>(it - t.gamma.begin());
  if (hi == 0) hi = 1;
  if (hi >= t.gamma.size()) hi = t.gamma.size() - 1;
  const std::size_t lo = hi - 1;
  const double frac = (g - t.gamma[lo]) / (t.gamma[hi] - t.gamma[lo]);
  return t.rate[lo] + frac * (t.rate[hi] - t.rate[lo]);
}

}  // namespace

UtilityModel::UtilityModel(double band_mhz, double power_cap, RateFunction rate_fn, UtilityFamily family)
    : band_mhz_(band_mhz), power_cap_(power_cap), rate_(std::move(rate_fn)), family_(std::move(family)) {
  if (!(band_mhz_ > 0.0)) throw ContractViolation("band must be positive");
  if (!(power_cap_ > 0.0)) throw ContractViolation("power cap must be positive");
  if (const auto* t = std::get_if<TabulatedRate>(&rate_)) validate_table(*t);
  if (const auto* c = std::get_if<CustomUtility>(&family_); c && !c->fn) {
    throw ContractViolation("custom utility needs a function");
  }
  rate_at_cap_ = rate(power_cap_);
}

UtilityModel UtilityModel::linear(double band_mhz, double power_cap) {
  return UtilityModel(band_mhz, power_cap, ShannonRate{}, LinearUtility{});
}

UtilityModel UtilityModel::cobb_douglas(double band_mhz, double power_cap, CobbDouglasUtility params) {
  return UtilityModel(band_mhz, power_cap, ShannonRate{}, params);
}

double UtilityModel::rate(double gamma) const {
  if (gamma < 0.0 || std::isnan(gamma)) throw DomainError("SINR must be non-negative");
  return std::visit(overloaded{[&](const ShannonRate&) { return std::log2(1.0 + gamma); },
                               [&](const TabulatedRate& t) { return table_rate(t, gamma); }},
                    rate_);
}

double UtilityModel::pi(double x, double lambda) const {
  return std::visit(
      overloaded{[&](const LinearUtility&) { return lambda * rate_at_cap_ * x; },
                 [&](const CobbDouglasUtility& cd) {
                   if (x <= 0.0) return 0.0;
                   return std::pow(cd.a * lambda + 1.0, cd.s) * std::pow(rate_at_cap_ * x, cd.e);
                 },
                 [&](const CustomUtility& c) { return c.fn(x, lambda); }},
      family_);
}

double UtilityModel::full_spectrum_bandwidth(int n) const {
  if (n < 1) throw DomainError("operator count must be at least 1");
  const double p = power_cap_;
  return band_mhz_ / rate_at_cap_ * rate(p / (p * (n - 1) + 1.0));
}

std::string UtilityModel::describe() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "W=" << band_mhz_ << "MHz P=" << power_cap_ << ' ';
  os << (is_shannon() ? "shannon" : "table") << ' ';
  std::visit(overloaded{[&](const LinearUtility&) { os << "linear"; },
                        [&](const CobbDouglasUtility& cd) {
                          os << "cobb_douglas(a=" << cd.a << ",s=" << cd.s << ",e=" << cd.e << ')';
                        },
                        [&](const CustomUtility& c) { os << "custom(" << c.name << ')'; }},
             family_);
  return os.str();
}

double sinr(const SpectrumAllocation& op, std::span<const SpectrumAllocation> others, double f,
            const UtilityModel& model) {
  if (!(f >= 0.0 && f < model.band())) throw DomainError("frequency outside [0, W)");
  if (!op.covers(f)) return 0.0;
  int m = 0;
  for (const auto& o : others) m += o.covers(f) ? 1 : 0;
  const double p = model.power_cap();
  return p / (1.0 + m * p);
}

namespace {

template <class OtherRange>
double integrate(const SpectrumAllocation& op, const OtherRange& others, std::size_t skip,
                 const UtilityModel& model) {
  const double p = model.power_cap();
  std::vector<double> cuts;
  cuts.reserve(16);
  double total = 0.0;
  for (const auto& iv : op.intervals()) {
    cuts.clear();
    cuts.push_back(iv.lo);
    cuts.push_back(iv.hi);
    for (std::size_t j = 0; j < others.size(); ++j) {
      if (j == skip) continue;
      for (const auto& ov : others[j].intervals()) {
        if (ov.lo > iv.lo && ov.lo < iv.hi) cuts.push_back(ov.lo);
        if (ov.hi > iv.lo && ov.hi < iv.hi) cuts.push_back(ov.hi);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c];
      const double b = cuts[c + 1];
      if (!(b > a)) continue;
      int m = 0;
      for (std::size_t j = 0; j < others.size(); ++j) {
        if (j == skip) continue;
        for (const auto& ov : others[j].intervals()) {
          if (ov.lo <= a && b <= ov.hi) {
            ++m;
            break;
          }
        }
      }
      // m == 0 contributes exactly (b - a) * r(P) / r(P).
      total += m == 0 ? (b - a) : (b - a) * model.rate(p / (1.0 + m * p)) / model.rate_at_cap();
    }
  }
  return total;
}

}  // namespace

EffectiveBandwidth effective_bandwidth(const SpectrumAllocation& op,
                                       std::span<const SpectrumAllocation> others,
                                       const UtilityModel& model) {
  return {integrate(op, others, others.size(), model)};
}

EffectiveBandwidth effective_bandwidth_among(std::span<const SpectrumAllocation> all, std::size_t who,
                                             const UtilityModel& model) {
  if (who >= all.size()) throw ContractViolation("operator index out of range");
  return {integrate(all[who], all, who, model)};
}

double utility(const SpectrumAllocation& op, std::span<const SpectrumAllocation> others, double lambda,
               const UtilityModel& model) {
  return model.pi(effective_bandwidth(op, others, model).value, lambda);
}

double full_spectrum_utility(int n, double lambda, const UtilityModel& model) {
  return model.pi(model.full_spectrum_bandwidth(n), lambda);
}

InterferenceCheck check_interference_limited(const UtilityModel& model, int n_max, LimitTerm limit) {
  if (n_max < 2) throw ContractViolation("n_max must be at least 2");
  const double p = model.power_cap();
  const double r_cap = model.rate_at_cap();
  InterferenceCheck out;
  out.holds = true;
  for (int n = 2; n <= n_max; ++n) {
    const double term = n * model.rate(p / ((n - 1) * p + 1.0));
    out.sup_term = std::max(out.sup_term, term);
    if (out.holds && !(r_cap > term)) {
      out.holds = false;
      out.witness_n = n;
    }
  }
  if (limit == LimitTerm::Include && model.is_shannon()) {
    out.limit_evaluated = true;
    const double lim = 1.0 / std::numbers::ln2;
    out.sup_term = std::max(out.sup_term, lim);
    if (!(r_cap > lim)) {
      out.limit_violated = true;
      out.holds = false;
    }
  }
  return out;
}

std::optional<PiCounterexample> PiPropertyCheck::first() const {
  if (increasing) return increasing;
  if (concavity) return concavity;
  return supermodularity;
}

PiPropertyCheck check_pi_properties(const UtilityModel& model, std::span<const double> x_grid,
                                    std::span<const double> lambda_set, std::span<const double> step_grid) {
  if (x_grid.empty() || lambda_set.empty() || step_grid.empty()) {
    throw ContractViolation("property grids must be non-empty");
  }
  constexpr double kMargin = 1e-9;
  const double band = model.band();
  PiPropertyCheck out;
  for (double step : step_grid) {
    if (!(step > 0.0)) throw ContractViolation("grid steps must be positive");
    for (double x : x_grid) {
      if (x + step > band) continue;
      for (double lam : lambda_set) {
        const double up = model.pi(x + step, lam) - model.pi(x, lam);
        if (!out.increasing && !(up > kMargin)) {
          out.increasing = PiCounterexample{PiProperty::Increasing, x, lam, lam, step, up, kMargin};
        }
        if (x - step >= 0.0) {
          const double down = model.pi(x, lam) - model.pi(x - step, lam);
          if (!out.concavity && !(up < down - kMargin)) {
            out.concavity = PiCounterexample{PiProperty::Concavity, x, lam, lam, step, up, down};
          }
        }
        for (double xi : lambda_set) {
          if (!(xi > lam)) continue;
          const double up_xi = model.pi(x + step, xi) - model.pi(x, xi);
          if (!out.supermodularity && !(up < up_xi - kMargin)) {
            out.supermodularity = PiCounterexample{PiProperty::Supermodularity, x, lam, xi, step, up, up_xi};
          }
        }
      }
    }
  }
  return out;
}

PiPropertyCheck check_pi_properties_default(const UtilityModel& model, std::span<const double> lambda_set) {
  const double band = model.band();
  std::vector<double> xs;
  for (int i = 0; i <= 40; ++i) xs.push_back(band * i / 40.0);
  const std::vector<double> steps{band / 200.0, band / 40.0, band / 8.0};
  return check_pi_properties(model, xs, lambda_set, steps);
}

}  // namespace specshare
