#include "specshare/cli_io.hpp"

#include "specshare/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace specshare {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view text, int line, const std::string& what) {
  Int v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(what + ": expected an integer, got '" + std::string(text) + "'", line);
  }
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class KeyTable {
 public:
  void add(std::string key, std::string value, int line) {
    if (auto it = entries_.find(key); it != entries_.end()) {
      throw ParseError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) + ")",
                       line);
    }
    entries_.emplace(std::move(key), Entry{std::move(value), line, false});
  }

  Entry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& key) {
    if (auto* e = find(key)) return *e;
    throw ParseError("missing required key '" + key + "'", 0);
  }

  double number(const std::string& key, double fallback) {
    auto* e = find(key);
    return e ? parse_double(e->value, e->line) : fallback;
  }

  int line(const std::string& key) {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  /// Keys present in the file that the chosen scheme never looked at.
  void reject_unused(const std::string& scheme) const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) throw ParseError("key '" + key + "' is not used by a '" + scheme + "' scenario with these settings", e.line);
    }
  }

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "scenario.n",          "scenario.w_mhz",          "scenario.p_linear",   "scenario.delta",
      "utility.family",      "utility.a",               "utility.s",           "utility.e",
      "scheme.kind",         "scheme.trade_mhz",        "scheme.balance_cap_mhz", "scheme.punishment_T",
      "scheme.grim",         "entry.cost",              "entry.arrival_slots", "sim.horizon",
      "sim.seed",            "sim.replications"};
  return keys;
}

// traffic.op<i>.p_high / traffic.op<i>.levels -> i (1-based), or 0
int traffic_key_op(std::string_view key, std::string_view& field) {
  constexpr std::string_view prefix = "traffic.op";
  if (key.substr(0, prefix.size()) != prefix) return 0;
  const auto rest = key.substr(prefix.size());
  const auto dot = rest.find('.');
  if (dot == std::string_view::npos || dot == 0) return 0;
  field = rest.substr(dot + 1);
  if (field != "p_high" && field != "levels") return 0;
  int op = 0;
  const auto digits = rest.substr(0, dot);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), op);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || op < 1) return 0;
  return op;
}

void range_check(bool ok, const std::string& what, int line) {
  if (!ok) throw ParseError(what, line);
}

TrafficSpec parse_levels(const Entry& e) {
  std::vector<TrafficLevel> support;
  for (auto w : words(e.value)) {
    const auto colon = w.find(':');
    if (colon == std::string_view::npos) throw ParseError("traffic levels need 'level:probability' pairs", e.line);
    support.push_back({parse_double(w.substr(0, colon), e.line), parse_double(w.substr(colon + 1), e.line)});
  }
  try {
    return TrafficSpec::finite_levels(std::move(support));
  } catch (const ContractViolation& ex) {
    throw ParseError(ex.what(), e.line);
  }
}

bool parse_bool(const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ParseError("expected true or false, got '" + e.value + "'", e.line);
}

const char* phase_names[] = {"cooperation", "punishment", "full_spectrum", "inactive"};

std::ofstream open_out(const std::filesystem::path& dir, const char* name, std::vector<std::filesystem::path>& written) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  written.push_back(path);
  return out;
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw ParseError("expected CSV header '" + std::string(header) + "'", 1);
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view text, int line) {
  text = trim(text);
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError("expected a number, got '" + std::string(text) + "'", line);
  }
  return v;
}

std::vector<double> parse_grid(std::string_view spec) {
  spec = trim(spec);
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw ParseError("grid range must be 'start:stop:step'", 0);
    const double a = parse_double(parts[0]);
    const double b = parse_double(parts[1]);
    const double step = parse_double(parts[2]);
    if (!(step > 0.0) || b < a) throw ParseError("grid range needs step > 0 and stop >= start", 0);
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
  } else {
    for (auto p : split(spec, ',')) out.push_back(parse_double(p));
  }
  if (out.empty()) throw ParseError("empty grid", 0);
  return out;
}

ParsedScenario parse_scenario(std::istream& in) {
  KeyTable keys;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(trim(line.substr(eq + 1)));
    if (value.empty()) throw ParseError("key '" + key + "' has no value", line_no);
    std::string_view field;
    if (!known_keys().count(key) && traffic_key_op(key, field) == 0) {
      throw ParseError("unknown key '" + key + "'", line_no);
    }
    keys.add(key, value, line_no);
  }

  ParsedScenario out;
  Scenario& sc = out.scenario;

  if (auto* e = keys.find("scenario.n")) sc.n = parse_int<int>(e->value, e->line, "scenario.n");
  range_check(sc.n >= 1, "scenario.n must be at least 1", keys.line("scenario.n"));
  const double band = keys.number("scenario.w_mhz", 100.0);
  range_check(band > 0.0, "scenario.w_mhz must be positive", keys.line("scenario.w_mhz"));
  const double power = keys.number("scenario.p_linear", 100.0);
  range_check(power > 0.0, "scenario.p_linear must be positive", keys.line("scenario.p_linear"));
  sc.delta = keys.number("scenario.delta", 0.99);
  range_check(sc.delta >= 0.0 && sc.delta < 1.0, "scenario.delta must lie in [0, 1)", keys.line("scenario.delta"));

  std::string family = "linear";
  if (auto* e = keys.find("utility.family")) family = e->value;
  if (family == "linear") {
    sc.model = UtilityModel::linear(band, power);
  } else if (family == "cobb_douglas") {
    CobbDouglasUtility cd;
    cd.a = keys.number("utility.a", cd.a);
    cd.s = keys.number("utility.s", cd.s);
    cd.e = keys.number("utility.e", cd.e);
    range_check(cd.a >= 0.0, "utility.a must be non-negative", keys.line("utility.a"));
    range_check(cd.s >= 0.0, "utility.s must be non-negative", keys.line("utility.s"));
    range_check(cd.e > 0.0 && cd.e < 1.0, "utility.e must lie in (0, 1)", keys.line("utility.e"));
    sc.model = UtilityModel::cobb_douglas(band, power, cd);
  } else {
    throw ParseError("utility.family must be linear or cobb_douglas", keys.line("utility.family"));
  }

  // traffic
  std::vector<int> traffic_lines(static_cast<std::size_t>(sc.n), 0);
  for (const auto& [key, e] : keys.entries()) {
    std::string_view field;
    const int op = traffic_key_op(key, field);
    if (op > sc.n) throw ParseError("traffic key for operator " + std::to_string(op) + " beyond scenario.n", e.line);
  }
  for (int i = 1; i <= sc.n; ++i) {
    const std::string base = "traffic.op" + std::to_string(i) + ".";
    auto* ph = keys.find(base + "p_high");
    auto* lv = keys.find(base + "levels");
    if (ph && lv) throw ParseError("set either p_high or levels for operator " + std::to_string(i), lv->line);
    if (lv) {
      sc.traffic.push_back(parse_levels(*lv));
      traffic_lines[static_cast<std::size_t>(i - 1)] = lv->line;
    } else {
      double p = 0.5;
      if (ph) {
        p = parse_double(ph->value, ph->line);
        range_check(p >= 0.0 && p <= 1.0, "p_high must lie in [0, 1]", ph->line);
        traffic_lines[static_cast<std::size_t>(i - 1)] = ph->line;
      }
      sc.traffic.push_back(TrafficSpec::two_level(p));
    }
  }

  // simulation
  if (auto* e = keys.find("sim.seed")) sc.seed = parse_int<std::uint64_t>(e->value, e->line, "sim.seed");
  if (auto* e = keys.find("sim.replications")) {
    sc.replications = parse_int<int>(e->value, e->line, "sim.replications");
    range_check(sc.replications >= 1, "sim.replications must be at least 1", e->line);
  }
  if (auto* e = keys.find("sim.horizon"); e && e->value != "auto") {
    sc.horizon = parse_int<int>(e->value, e->line, "sim.horizon");
    range_check(sc.horizon >= 1, "sim.horizon must be at least 1", e->line);
  } else {
    sc.horizon = auto_horizon(sc.delta);
    out.notes.push_back("horizon " + std::to_string(sc.horizon) + " slots (delta^H < 1e-8)");
  }

  const auto& kind_entry = keys.require("scheme.kind");
  const std::string kind = kind_entry.value;
  auto punishment_entry = [&]() -> std::optional<int> {
    auto* e = keys.find("scheme.punishment_T");
    if (!e || e->value == "auto") return std::nullopt;
    const int t = parse_int<int>(e->value, e->line, "scheme.punishment_T");
    range_check(t >= 1, "scheme.punishment_T must be at least 1", e->line);
    return t;
  };

  if (kind == "full") {
    sc.scheme = FullSpectrumScheme{};
  } else if (kind == "static") {
    StaticParams p = StaticParams::uniform(sc.n, 1);
    if (auto* e = keys.find("scheme.grim")) p.grim = parse_bool(*e);
    if (const auto t = punishment_entry()) {
      p.punishment_slots = *t;
    } else if (!p.grim) {
      p.punishment_slots = min_punishment_length(sc.model, sc.traffic, p);
      out.notes.push_back("punishment T = " + std::to_string(p.punishment_slots));
    }
    sc.scheme = StaticScheme{p};
  } else if (kind == "entry") {
    EntryParams p;
    const auto& cost = keys.require("entry.cost");
    p.cost = parse_double(cost.value, cost.line);
    range_check(p.cost >= 0.0, "entry.cost must be non-negative", cost.line);
    if (auto* e = keys.find("entry.arrival_slots")) {
      for (auto w : words(e->value)) p.arrival_slots.push_back(parse_int<std::uint64_t>(w, e->line, "entry.arrival_slots"));
      range_check(p.arrival_slots.size() == static_cast<std::size_t>(sc.n),
                  "entry.arrival_slots needs one slot per prospective operator", e->line);
      for (std::size_t i = 1; i < p.arrival_slots.size(); ++i) {
        range_check(p.arrival_slots[i] > p.arrival_slots[i - 1], "arrival slots must be strictly increasing", e->line);
      }
    } else {
      for (int i = 0; i < sc.n; ++i) p.arrival_slots.push_back(static_cast<std::uint64_t>(i));
    }
    for (int i = 1; i < sc.n; ++i) {
      const auto& a = sc.traffic[0].support();
      const auto& b = sc.traffic[static_cast<std::size_t>(i)].support();
      const bool same = a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
                          return x.level == y.level && x.probability == y.probability;
                        });
      range_check(same, "entrants must share one traffic distribution", traffic_lines[static_cast<std::size_t>(i)]);
    }
    sc.scheme = EntryScheme{p};
  } else if (kind == "dynamic") {
    range_check(sc.n >= 2, "dynamic sharing needs at least two operators", keys.line("scenario.n"));
    for (int i = 0; i < sc.n; ++i) {
      range_check(sc.traffic[static_cast<std::size_t>(i)].is_two_level(),
                  "dynamic sharing needs traffic levels in {0, 1}", traffic_lines[static_cast<std::size_t>(i)]);
    }
    const auto& cap = keys.require("scheme.balance_cap_mhz");
    const double b_bar = parse_double(cap.value, cap.line);
    range_check(b_bar > 0.0, "scheme.balance_cap_mhz must be positive", cap.line);
    const auto& trade = keys.require("scheme.trade_mhz");
    const auto explicit_t = punishment_entry();
    DynamicParams p;
    if (trade.value == "auto") {
      range_check(sc.n == 2, "scheme.trade_mhz = auto needs two operators", trade.line);
      const auto choice = choose_delta(band, b_bar, sc.model, sc.traffic, sc.delta);
      p = choice.params;
      out.notes.push_back("Delta = " + format_double(p.trade_mhz) + " MHz (" +
                          (choice.certified ? "certified" : "uncertified: " + choice.note) + ")");
      if (explicit_t) p.punishment_slots = *explicit_t;
    } else {
      const double d = parse_double(trade.value, trade.line);
      range_check(d > 0.0 && d <= band / sc.n, "scheme.trade_mhz must lie in (0, W/n]", trade.line);
      const double ratio = b_bar / d;
      range_check(std::abs(ratio - std::round(ratio)) <= 1e-9, "balance cap must be an integer multiple of Delta",
                  cap.line);
      p = DynamicParams{sc.n, band, d, static_cast<int>(std::round(ratio)), 1};
      if (explicit_t) {
        p.punishment_slots = *explicit_t;
      } else {
        const auto sizing = min_punishment_dynamic(p, sc.model, sc.traffic, sc.delta);
        p.punishment_slots = sizing.T;
      }
    }
    if (!explicit_t) out.notes.push_back("punishment T = " + std::to_string(p.punishment_slots));
    sc.scheme = DynamicScheme{p, {}};
  } else {
    throw ParseError("scheme.kind must be full, static, entry or dynamic", kind_entry.line);
  }

  keys.reject_unused(kind);
  try {
    sc.validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), 0);
  }
  return out;
}

ParsedScenario parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return parse_scenario(in);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.slot << ',' << r.op + 1 << ',' << format_double(r.traffic) << ',' << format_double(r.width_mhz) << ','
        << format_double(r.utility) << ',' << format_double(r.balance_mhz) << ',' << r.phase << '\n';
  }
}

Trace read_trace_csv(std::istream& in) {
  expect_header(in, kTraceHeader);
  Trace trace;
  std::string raw;
  int line = 1;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    const auto f = split(trim(raw), ',');
    if (f.size() != 7) throw ParseError("trace rows have 7 fields", line);
    TraceRecord r;
    r.slot = parse_int<std::uint64_t>(f[0], line, "slot");
    r.op = parse_int<int>(f[1], line, "operator") - 1;
    r.traffic = parse_double(f[2], line);
    r.width_mhz = parse_double(f[3], line);
    r.utility = parse_double(f[4], line);
    r.balance_mhz = parse_double(f[5], line);
    r.phase = std::string(f[6]);
    if (std::find(std::begin(phase_names), std::end(phase_names), r.phase) == std::end(phase_names)) {
      throw ParseError("unknown phase '" + r.phase + "'", line);
    }
    if (r.op < 0) throw ParseError("operators are numbered from 1", line);
    trace.n = std::max(trace.n, r.op + 1);
    trace.records.push_back(std::move(r));
  }
  return trace;
}

std::vector<SummaryRow> summary_rows(const ReplicationStats& stats, const Scheme& scheme) {
  std::vector<SummaryRow> rows;
  for (std::size_t i = 0; i < stats.ops.size(); ++i) {
    rows.push_back({static_cast<int>(i) + 1, scheme_name(scheme), stats.ops[i].mean, stats.ops[i].std_err});
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.op << ',' << r.scheme << ',' << format_double(r.mean_revenue) << ',' << format_double(r.std_err) << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  expect_header(in, kSummaryHeader);
  std::vector<SummaryRow> rows;
  std::string raw;
  int line = 1;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    const auto f = split(trim(raw), ',');
    if (f.size() != 4) throw ParseError("summary rows have 4 fields", line);
    rows.push_back({parse_int<int>(f[0], line, "operator"), std::string(f[1]), parse_double(f[2], line),
                    parse_double(f[3], line)});
  }
  return rows;
}

void write_findings_csv(std::ostream& out, const std::vector<DeviationFinding>& findings) {
  out << kFindingsHeader << '\n';
  for (const auto& f : findings) {
    std::string state = "op=" + std::to_string(f.op + 1) + " " + f.state;
    if (!f.event.empty()) state += " event=" + f.event;
    std::replace(state.begin(), state.end(), ',', ';');
    out << state << ',' << to_string(f.kind) << ',' << format_double(f.gain) << ',' << format_double(f.loss) << ','
        << (f.profitable ? "true" : "false") << '\n';
  }
}

void write_fig2_csv(std::ostream& out, const std::vector<Fig2Row>& rows) {
  out << kFig2Header << '\n';
  for (const auto& r : rows) out << format_double(r.cost) << ',' << r.n_star << '\n';
}

void write_fig3_csv(std::ostream& out, const std::vector<Fig3Row>& rows) {
  out << kFig3Header << '\n';
  for (const auto& r : rows) {
    out << format_double(r.p_db) << ',' << format_double(r.revenue_full) << ',' << format_double(r.revenue_static)
        << ',' << format_double(r.revenue_dynamic) << '\n';
  }
}

void write_fig4_csv(std::ostream& out, const std::vector<Fig4Row>& rows) {
  out << kFig4Header << '\n';
  for (const auto& r : rows) {
    out << format_double(r.balance_cap_mhz) << ',' << format_double(r.dynamic_over_full_percent) << '\n';
  }
}

std::vector<Fig2Row> fig2_rows(const std::vector<double>& costs) {
  const auto model = UtilityModel::linear(100.0, 100.0);
  const auto traffic = TrafficSpec::two_level(0.5);
  std::vector<Fig2Row> rows;
  for (double c : costs) {
    if (!(c > 0.0)) throw ConfigError("entry costs must be positive");
    try {
      rows.push_back({c, max_entrants(c, model, traffic), false});
    } catch (const CapExceededError& e) {
      rows.push_back({c, e.lower_bound(), true});
    }
  }
  return rows;
}

UtilityModel figure_model(double power) { return UtilityModel::cobb_douglas(100.0, power); }

std::vector<TrafficSpec> figure_traffic(double p_low_1, double p_low_2) {
  return {TrafficSpec::two_level(1.0 - p_low_1), TrafficSpec::two_level(1.0 - p_low_2)};
}

std::vector<Fig3Row> fig3_rows(const std::vector<double>& p_db, const Fig3Options& o) {
  const auto traffic = figure_traffic(o.p_low_1, o.p_low_2);
  std::vector<Fig3Row> rows;
  for (double db : p_db) {
    const double power = std::pow(10.0, db / 10.0);
    const auto model = figure_model(power);
    Fig3Row r;
    r.p_db = db;
    for (const auto& t : traffic) {
      r.revenue_full += expectation(t, [&](double lam) { return full_spectrum_utility(2, lam, model); });
      r.revenue_static += expectation(t, [&](double lam) { return model.pi(model.band() / 2.0, lam); });
    }
    try {
      const auto choice = choose_delta(model.band(), o.balance_cap_mhz, model, traffic, o.delta);
      if (o.replications > 0) {
        Scenario sc{2, model, traffic, DynamicScheme{choice.params, {}}, o.delta, auto_horizon(o.delta), o.seed,
                    o.replications};
        const auto stats = replicate(sc, o.replications);
        r.revenue_dynamic = stats.ops[0].mean + stats.ops[1].mean;
      } else {
        r.revenue_dynamic = choice.sum_revenue;
      }
    } catch (const InfeasibleError&) {
      r.revenue_dynamic = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<Fig4Row> fig4_rows(const std::vector<double>& caps, const Fig4Options& o) {
  const auto traffic = figure_traffic(o.p_low_1, o.p_low_2);
  const auto model = figure_model(o.power);
  double full = 0.0;
  for (const auto& t : traffic) {
    full += expectation(t, [&](double lam) { return full_spectrum_utility(2, lam, model); });
  }
  std::vector<Fig4Row> rows;
  for (double cap : caps) {
    if (!(cap > 0.0)) throw ConfigError("balance caps must be positive");
    const auto candidates = evaluate_delta_grid(model.band(), cap, model, traffic, o.delta);
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& c : candidates) {
      if ((o.uncertified || c.certified()) && !(c.sum_revenue <= best)) best = c.sum_revenue;
    }
    rows.push_back({cap, (best / full - 1.0) * 100.0});
  }
  return rows;
}

CommandResult cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                           const SimulateOverrides& overrides) {
  auto parsed = parse_scenario_file(scenario);
  auto& sc = parsed.scenario;
  if (overrides.seed) sc.seed = *overrides.seed;
  if (overrides.replications) {
    if (*overrides.replications < 1) throw ConfigError("replications must be at least 1");
    sc.replications = *overrides.replications;
  }
  CommandResult res;
  const auto single = run(sc);
  {
    auto out = open_out(out_dir, "trace.csv", res.written);
    write_trace_csv(out, single.trace);
  }
  const auto stats = replicate(sc, sc.replications);
  {
    auto out = open_out(out_dir, "summary.csv", res.written);
    write_summary_csv(out, summary_rows(stats, sc.scheme));
  }
  for (const auto& n : parsed.notes) res.message += n + "\n";
  res.message += "tail bound " + format_double(stats.tail_bound) + "\n";
  return res;
}

CommandResult cmd_verify(const std::filesystem::path& scenario, const std::filesystem::path& out_dir) {
  const auto parsed = parse_scenario_file(scenario);
  const auto& sc = parsed.scenario;
  std::vector<DeviationFinding> findings;
  CommandResult res;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FullSpectrumScheme>) {
          throw ConfigError("verify needs a static, entry or dynamic scheme");
        } else if constexpr (std::is_same_v<T, StaticScheme>) {
          findings = verify_static(s.params, sc.model, sc.traffic, sc.delta);
        } else if constexpr (std::is_same_v<T, EntryScheme>) {
          findings = verify_entry(s.params, sc.model, sc.traffic[0], sc.delta);
        } else {
          if (sc.n == 2) {
            findings = verify_truthfulness_exact(s.params, sc.model, sc.traffic, sc.delta);
          } else {
            auto v = verify_truthfulness_n_ops(s.params, sc.model, sc.traffic, sc.delta);
            if (v.mode == VerificationMode::MonteCarlo) res.message += "truthfulness checked by Monte Carlo\n";
            findings = std::move(v.findings);
          }
          try {
            auto d = verify_detectable_dynamic(s.params, sc.model, sc.traffic, sc.delta);
            findings.insert(findings.end(), d.begin(), d.end());
          } catch (const InfeasibleError& e) {
            res.message += std::string("detectable deviations not checked: ") + e.what() + "\n";
          }
        }
      },
      sc.scheme);
  {
    auto out = open_out(out_dir, "findings.csv", res.written);
    write_findings_csv(out, findings);
  }
  const auto bad = std::count_if(findings.begin(), findings.end(), [](const auto& f) { return f.profitable; });
  res.exit_code = bad == 0 ? 0 : 1;
  res.message += std::to_string(findings.size()) + " deviations checked, " + std::to_string(bad) + " profitable\n";
  return res;
}

CommandResult cmd_fig2(const std::vector<double>& costs, const std::filesystem::path& out_dir) {
  CommandResult res;
  const auto rows = fig2_rows(costs);
  auto out = open_out(out_dir, "fig2.csv", res.written);
  write_fig2_csv(out, rows);
  for (const auto& r : rows) {
    if (r.capped) res.message += "cost " + format_double(r.cost) + ": n* is at least " + std::to_string(r.n_star) + "\n";
  }
  return res;
}

CommandResult cmd_fig3(const std::vector<double>& p_db, const std::filesystem::path& out_dir, const Fig3Options& options) {
  CommandResult res;
  const auto rows = fig3_rows(p_db, options);
  auto out = open_out(out_dir, "fig3.csv", res.written);
  write_fig3_csv(out, rows);
  return res;
}

CommandResult cmd_fig4(const std::vector<double>& caps, const std::filesystem::path& out_dir, const Fig4Options& options) {
  CommandResult res;
  const auto rows = fig4_rows(caps, options);
  auto out = open_out(out_dir, "fig4.csv", res.written);
  write_fig4_csv(out, rows);
  return res;
}

}  // namespace specshare
