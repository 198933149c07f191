#include "rds/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rds/bounds.hpp"
#include "rds/error.hpp"

namespace rds {
namespace {

using enum Subcommand;

constexpr std::pair<Subcommand, std::string_view> kNames[] = {
    {Eval, "eval"},       {Scan, "scan"},
    {NoZeros, "no-zeros"}, {SignChanges, "sign-changes"},
    {Clt, "clt"},         {CharFn, "char-fn"},
    {VarianceProfile, "variance-profile"}, {Inequalities, "inequalities"},
    {BuEvent, "bu-event"}, {Exceedance, "exceedance"},
    {Report, "report"},
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad(std::string_view key, const std::string& what) {
  throw ValidationError("config key '" + std::string(key) + "': " + what);
}

double to_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    bad(key, "'" + t + "' is not a finite real number");
  }
  return v;
}

std::int64_t to_int(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && ptr == t.data() + t.size()) return v;
  // Allow integral values written as reals, e.g. 1e5.
  const double d = to_double(key, t);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) bad(key, "'" + t + "' is not an integer");
  return static_cast<std::int64_t>(d);
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad(key, "'" + t + "' is not a nonnegative integer");
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad(key, "'" + t + "' is not a boolean (true/false)");
}

std::vector<double> to_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.empty()) return out;
  std::size_t pos = 0;
  while (pos <= t.size()) {
    const auto comma = t.find(',', pos);
    const auto item = std::string_view(t).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(to_double(key, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

struct Key {
  std::string_view name;
  std::set<Subcommand> used_by;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::set<Subcommand> kSeqUsers = {Eval, Scan, NoZeros, SignChanges, Clt, CharFn, VarianceProfile, BuEvent, Exceedance};
const std::set<Subcommand> kTrialUsers = {NoZeros, SignChanges, Clt, BuEvent, Exceedance};

#define RDS_KEY(name, users, field, parse, show)                                                       \
  Key {                                                                                                \
    name, users, [](ExperimentConfig& c, std::string_view v) { c.field = parse(name, v); },           \
        [](const ExperimentConfig& c) { return show(c.field); }                                         \
  }

std::string show_str(const std::string& s) { return s; }
std::string show_int(std::int64_t v) { return std::to_string(v); }
std::string show_uint(std::uint64_t v) { return std::to_string(v); }
std::string show_bool(bool b) { return b ? "true" : "false"; }
std::string show_double(double v) { return fmt(v); }
std::string show_list(const std::vector<double>& v) { return fmt(v); }
std::string parse_str(std::string_view, std::string_view v) { return trim(v); }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      RDS_KEY("seq", kSeqUsers, seq, parse_str, show_str),
      RDS_KEY("seq-exponent", kSeqUsers, seq_exponent, to_double, show_double),
      RDS_KEY("seq-start", kSeqUsers, seq_start, to_int, show_int),
      RDS_KEY("seq-values", kSeqUsers, seq_values, to_list, show_list),
      RDS_KEY("seq-file", kSeqUsers, seq_file, parse_str, show_str),
      RDS_KEY("seed", (std::set{Eval, Scan, NoZeros, SignChanges, Clt, Inequalities, BuEvent, Exceedance}), seed,
              to_uint, show_uint),
      RDS_KEY("trials", kTrialUsers, trials, to_int, show_int),
      RDS_KEY("first-trial", kTrialUsers, first_trial, to_int, show_int),
      RDS_KEY("trial", (std::set{Eval, Scan}), trial, to_int, show_int),
      RDS_KEY("mode", (std::set{Eval}), mode, parse_str, show_str),
      RDS_KEY("sigma", (std::set{Eval, Clt}), sigma, to_double, show_double),
      RDS_KEY("sigmas", (std::set{SignChanges, CharFn, VarianceProfile}), sigmas, to_list, show_list),
      RDS_KEY("sigma-lo", (std::set{Scan, NoZeros}), sigma_lo, to_double, show_double),
      RDS_KEY("sigma-hi", (std::set{Scan, SignChanges}), sigma_hi, to_double, show_double),
      RDS_KEY("sigma0", (std::set{Eval, Scan, NoZeros, SignChanges}), sigma0, to_list, show_list),
      RDS_KEY("sigma-switch", (std::set{NoZeros}), sigma_switch, to_double, show_double),
      RDS_KEY("cutoff", (std::set{Eval, Scan, NoZeros, SignChanges, Clt, CharFn, VarianceProfile}), cutoff, to_double,
              show_double),
      RDS_KEY("eta", (std::set{Eval, Scan, NoZeros, SignChanges}), eta, to_double, show_double),
      RDS_KEY("grid", (std::set{Scan, NoZeros, SignChanges}), grid, to_int, show_int),
      RDS_KEY("refine", (std::set{Scan, NoZeros, SignChanges}), refine, to_int, show_int),
      RDS_KEY("heuristic", (std::set{Scan, SignChanges}), heuristic, to_bool, show_bool),
      RDS_KEY("heuristic-max-cutoff", (std::set{Scan, SignChanges}), heuristic_max_cutoff, to_double, show_double),
      RDS_KEY("condition-cutoff", (std::set{NoZeros}), condition_cutoff, to_double, show_double),
      RDS_KEY("exhaustive", (std::set{NoZeros}), exhaustive, to_bool, show_bool),
      RDS_KEY("u-ladder", (std::set{BuEvent}), u_ladder, to_list, show_list),
      RDS_KEY("horizon-factor", (std::set{BuEvent}), horizon_factor, to_double, show_double),
      RDS_KEY("bu-level", (std::set{BuEvent}), bu_level, to_double, show_double),
      RDS_KEY("scales", (std::set{Exceedance}), scales, to_list, show_list),
      RDS_KEY("levels", (std::set{Exceedance}), levels, to_list, show_list),
      RDS_KEY("t-max", (std::set{CharFn}), t_max, to_double, show_double),
      RDS_KEY("points", (std::set{CharFn}), points, to_int, show_int),
      RDS_KEY("n", (std::set{Inequalities}), n, to_int, show_int),
      RDS_KEY("instances", (std::set{Inequalities}), instances, to_int, show_int),
      RDS_KEY("lambda-points", (std::set{Inequalities}), lambda_points, to_int, show_int),
      RDS_KEY("input", (std::set{Report}), input, parse_str, show_str),
  };
  return table;
}

#undef RDS_KEY

const Key* find_key(std::string_view name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void apply_defaults(ExperimentConfig& c) {
  switch (c.subcommand) {
    case Eval:
      c.cutoff = 1e4;
      break;
    case Scan:
      break;
    case NoZeros:
      c.seq = "weighted-naturals";
      c.eta = 1e-3;
      c.trials = 500;
      break;
    case SignChanges:
      c.sigmas = {0.70, 0.62, 0.56, 0.53};
      c.heuristic = true;
      c.trials = 200;
      break;
    case Clt:
      c.sigma = 0.6;
      c.cutoff = 1e6;
      c.trials = 2000;
      break;
    case CharFn:
      c.sigmas = {0.75, 0.65, 0.6, 0.55};
      c.cutoff = 1e6;
      break;
    case VarianceProfile:
      c.sigmas = {0.75, 0.65, 0.6, 0.57};
      c.cutoff = 0.0;
      break;
    case Inequalities:
      break;
    case BuEvent:
      c.seq = "weighted-naturals";
      c.u_ladder = {1e2, 1e3, 1e4, 1e5};
      c.trials = 2000;
      break;
    case Exceedance:
      c.scales = {1e2, 1e3, 1e4};
      c.levels = {1.0};
      c.trials = 1000;
      break;
    case Report:
      break;
  }
}

void require(bool ok, std::string_view key, const std::string& what) {
  if (!ok) bad(key, what);
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) == v.end();
}

}  // namespace

std::string_view to_string(Subcommand s) {
  for (const auto& [k, name] : kNames) {
    if (k == s) return name;
  }
  return "?";
}

Subcommand parse_subcommand(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw ValidationError("unknown subcommand '" + std::string(name) + "'");
}

const std::vector<Subcommand>& all_subcommands() {
  static const std::vector<Subcommand> v = [] {
    std::vector<Subcommand> out;
    for (const auto& [k, _] : kNames) out.push_back(k);
    return out;
  }();
  return v;
}

bool is_execution_key(std::string_view key) { return key == "workers" || key == "out" || key == "svg"; }

std::vector<std::string> config_keys(Subcommand s) {
  std::vector<std::string> out;
  for (const auto& k : keys()) {
    if (k.used_by.contains(s)) out.emplace_back(k.name);
  }
  out.emplace_back("workers");
  out.emplace_back("out");
  out.emplace_back("svg");
  return out;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  if (key == "workers") {
    const auto w = to_int(key, value);
    require(w >= 1 && w <= 1024, key, "must lie in [1, 1024]");
    workers = static_cast<int>(w);
    return;
  }
  if (key == "out") {
    out = trim(value);
    return;
  }
  if (key == "svg") {
    svg = to_bool(key, value);
    return;
  }
  const Key* k = find_key(key);
  if (!k) bad(key, "unknown key");
  if (!k->used_by.contains(subcommand)) {
    bad(key, "not accepted by subcommand '" + std::string(to_string(subcommand)) + "'");
  }
  k->set(*this, value);
}

void ExperimentConfig::validate() const {
  const bool uses_seq = kSeqUsers.contains(subcommand);
  std::shared_ptr<const FrequencySequence> s;
  if (uses_seq) {
    require(seq == "naturals" || seq == "primes" || seq == "weighted-naturals" || seq == "explicit", "seq",
            "expected naturals, primes, weighted-naturals or explicit");
    require(seq_start >= 0, "seq-start", "must be >= 0");
    if (seq == "explicit") {
      require(seq_values.empty() != seq_file.empty(), "seq-values", "explicit sequences need exactly one of seq-values, seq-file");
    } else {
      require(seq_values.empty(), "seq-values", "only used with seq = explicit");
      require(seq_file.empty(), "seq-file", "only used with seq = explicit");
    }
    if (seq == "weighted-naturals") require(seq_exponent > 1.0, "seq-exponent", "must be > 1");
    try {
      s = make_sequence();
    } catch (const ValidationError& e) {
      bad("seq", e.what());
    }
  }
  if (kTrialUsers.contains(subcommand)) {
    require(trials >= 1, "trials", "must be >= 1");
    require(first_trial >= 0, "first-trial", "must be >= 0");
  }
  require(trial >= 0, "trial", "must be >= 0");
  const bool finite = s && s->is_finite();
  auto check_eta = [&] { require(eta > 0.0 && eta < 1.0, "eta", "must lie in (0, 1)"); };
  auto check_cutoff = [&] { require(cutoff >= 1.0, "cutoff", "must be >= 1"); };
  auto check_grid = [&] {
    require(grid >= 2 && grid <= 100000, "grid", "must lie in [2, 100000]");
    require(refine >= 0 && refine <= 30, "refine", "must lie in [0, 30]");
  };
  auto check_sigma0 = [&](double sigma_min) {
    for (const double s0 : sigma0) {
      require(s0 > 0.5 || finite, "sigma0", "entries must exceed 1/2");
      require(s0 <= sigma_min || sigma_min <= 0.5, "sigma0", "entries must not exceed the smallest sigma of the run");
    }
  };
  switch (subcommand) {
    case Eval:
      require(mode == "certified" || mode == "deterministic" || mode == "heuristic", "mode",
              "expected certified, deterministic or heuristic");
      check_eta();
      check_cutoff();
      if (mode == "heuristic") require(sigma > 0.5, "sigma", "heuristic evaluation needs sigma > 1/2");
      if (mode == "deterministic") require(s->tail_converges(sigma), "sigma", "the tail diverges at this sigma");
      if (mode == "certified") {
        require(sigma > 0.5 || finite, "sigma", "must exceed 1/2");
        require(sigma0.size() <= 1, "sigma0", "eval takes a single base exponent");
        check_sigma0(sigma);
      }
      break;
    case Scan:
      require(sigma_lo < sigma_hi, "sigma-lo", "must be below sigma-hi");
      require(sigma_lo > 0.5 || finite, "sigma-lo", "must exceed 1/2 for infinite sequences");
      check_eta();
      check_cutoff();
      check_grid();
      check_sigma0(sigma_lo);
      require(heuristic_max_cutoff >= 1.0, "heuristic-max-cutoff", "must be >= 1");
      break;
    case NoZeros:
      require(sigma_lo > 0.5 || finite, "sigma-lo", "must exceed 1/2 for infinite sequences");
      require(sigma_switch > sigma_lo, "sigma-switch", "must exceed sigma-lo");
      check_eta();
      check_cutoff();
      check_grid();
      check_sigma0(sigma_lo);
      require(condition_cutoff >= 0.0, "condition-cutoff", "must be >= 0");
      if (exhaustive) {
        require(finite, "exhaustive", "needs a finite (explicit) sequence");
        const auto count = *s->last_index() - s->start_index() + 1;
        require(count <= static_cast<std::int64_t>(kMaxEnumeration), "exhaustive",
                "at most " + std::to_string(kMaxEnumeration) + " elements can be enumerated");
      }
      break;
    case SignChanges:
      require(!sigmas.empty(), "sigmas", "needs at least one ladder rung");
      require(std::adjacent_find(sigmas.begin(), sigmas.end(), [](double a, double b) { return !(a > b); }) ==
                  sigmas.end(),
              "sigmas", "ladder must be strictly decreasing");
      require(sigmas.back() > 0.5, "sigmas", "rungs must exceed 1/2");
      require(sigmas.front() < sigma_hi, "sigma-hi", "must exceed every ladder rung");
      check_eta();
      check_cutoff();
      check_grid();
      check_sigma0(sigmas.back());
      require(heuristic_max_cutoff >= 1.0, "heuristic-max-cutoff", "must be >= 1");
      break;
    case Clt:
      require(sigma > 0.0, "sigma", "must be > 0");
      check_cutoff();
      break;
    case CharFn:
      require(!sigmas.empty(), "sigmas", "needs at least one sigma");
      for (const double x : sigmas) require(x > 0.0, "sigmas", "entries must be > 0");
      check_cutoff();
      require(t_max > 0.0, "t-max", "must be > 0");
      require(points >= 2 && points <= 100000, "points", "must lie in [2, 100000]");
      break;
    case VarianceProfile:
      require(!sigmas.empty(), "sigmas", "needs at least one sigma");
      for (const double x : sigmas) require(x > 0.5, "sigmas", "entries must exceed 1/2");
      require(cutoff == 0.0 || cutoff >= 1.0, "cutoff", "must be 0 (use y) or >= 1");
      break;
    case Inequalities:
      require(n >= 1, "n", "must be >= 1");
      require(instances >= 1, "instances", "must be >= 1");
      require(lambda_points >= 1 && lambda_points <= 10000, "lambda-points", "must lie in [1, 10000]");
      break;
    case BuEvent:
      require(!u_ladder.empty(), "u-ladder", "needs at least one U");
      require(strictly_increasing(u_ladder), "u-ladder", "must be strictly increasing");
      require(u_ladder.front() >= 1.0, "u-ladder", "entries must be >= 1");
      require(horizon_factor >= 1.0, "horizon-factor", "must be >= 1");
      require(bu_level > 0.0, "bu-level", "must be > 0");
      require(s->tail_converges(1.0), "seq", "the B_U bound needs sum 1/p < infinity");
      break;
    case Exceedance:
      require(!scales.empty(), "scales", "needs at least one scale");
      require(strictly_increasing(scales), "scales", "must be strictly increasing");
      require(scales.front() >= 1.0, "scales", "entries must be >= 1");
      require(!levels.empty(), "levels", "needs at least one level");
      for (const double l : levels) require(l >= 0.0, "levels", "entries must be >= 0");
      break;
    case Report:
      require(!input.empty(), "input", "path of the report to render is required");
      break;
  }
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> lines;
  lines["schema"] = std::to_string(kConfigSchema);
  lines["subcommand"] = std::string(to_string(subcommand));
  for (const auto& k : keys()) {
    if (k.used_by.contains(subcommand)) lines[std::string(k.name)] = k.get(*this);
  }
  std::string out;
  for (const auto& [k, v] : lines) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

std::shared_ptr<const FrequencySequence> ExperimentConfig::make_sequence() const {
  if (seq == "naturals") return std::make_shared<FrequencySequence>(FrequencySequence::naturals(seq_start ? seq_start : 1));
  if (seq == "primes") return std::make_shared<FrequencySequence>(FrequencySequence::primes(seq_start ? seq_start : 1));
  if (seq == "weighted-naturals") {
    return std::make_shared<FrequencySequence>(
        FrequencySequence::weighted_naturals(seq_exponent, seq_start ? seq_start : 2));
  }
  if (seq == "explicit") {
    if (!seq_file.empty()) {
      auto loaded = FrequencySequence::load_explicit(seq_file);
      if (seq_start > 1) throw ValidationError("seq-start is not supported with seq-file");
      return std::make_shared<FrequencySequence>(std::move(loaded));
    }
    return std::make_shared<FrequencySequence>(FrequencySequence::explicit_values(seq_values, seq_start ? seq_start : 1));
  }
  throw ValidationError("config key 'seq': unknown sequence '" + seq + "'");
}

ExperimentConfig make_config(Subcommand s) {
  ExperimentConfig c;
  c.subcommand = s;
  apply_defaults(c);
  return c;
}

ExperimentConfig parse_config(std::string_view text, std::optional<Subcommand> subcommand) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::optional<Subcommand> declared;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!seen.insert(key).second) bad(key, "given twice (line " + std::to_string(line_no) + ")");
    if (key == "schema") {
      if (to_int(key, value) != kConfigSchema) bad(key, "unsupported schema version " + value);
      continue;
    }
    if (key == "subcommand") {
      declared = parse_subcommand(value);
      continue;
    }
    entries.emplace_back(key, value);
  }
  if (subcommand && declared && *subcommand != *declared) {
    bad("subcommand", "file declares '" + std::string(to_string(*declared)) + "' but '" +
                          std::string(to_string(*subcommand)) + "' was requested");
  }
  const auto chosen = subcommand ? subcommand : declared;
  if (!chosen) bad("subcommand", "not given");
  ExperimentConfig c = make_config(*chosen);
  for (const auto& [k, v] : entries) c.set(k, v);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file, std::optional<Subcommand> subcommand) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), subcommand);
}

}  // namespace rds
