#include "superarrival/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "superarrival/errors.hpp"

namespace superarrival {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(field, "expected a number, got '" + std::string(text) + "'");
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

std::uint64_t parse_unsigned(const std::string& field, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(field, "expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = text.find(',');
    items.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return items;
}

bool strip_suffix(std::string_view& text, std::string_view suffix) {
  if (text.size() < suffix.size() || text.substr(text.size() - suffix.size()) != suffix)
    return false;
  text.remove_suffix(suffix.size());
  text = trim(text);
  return true;
}

struct Entry {
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Entry number_entry(const char* key, T ExperimentConfig::*member) {
  const std::string k = key;
  return {k,
          [k, member](ExperimentConfig& c, std::string_view v) {
            if constexpr (std::is_same_v<T, double>) {
              c.*member = parse_double(k, v);
            } else {
              c.*member = static_cast<T>(parse_unsigned(k, v));
            }
          },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_same_v<T, double>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

Entry time_entry(const char* key, TimeValue ExperimentConfig::*member) {
  const std::string k = key;
  return {k, [k, member](ExperimentConfig& c, std::string_view v) { c.*member = TimeValue::parse(k, v); },
          [member](const ExperimentConfig& c) { return (c.*member).str(); }};
}

Entry optional_steps_entry(const char* key, std::optional<std::size_t> ExperimentConfig::*member) {
  const std::string k = key;
  return {k,
          [k, member](ExperimentConfig& c, std::string_view v) {
            v = trim(v);
            if (v.empty() || v == "auto") {
              c.*member = std::nullopt;
            } else {
              c.*member = static_cast<std::size_t>(parse_unsigned(k, v));
            }
          },
          [member](const ExperimentConfig& c) {
            return (c.*member) ? std::to_string(*(c.*member)) : std::string("auto");
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({"experiment",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.experiment = experiment_kind_from_string(trim(v));
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); }});
    t.push_back(number_entry("x_min", &ExperimentConfig::x_min));
    t.push_back(number_entry("x_max", &ExperimentConfig::x_max));
    t.push_back(number_entry("n_points", &ExperimentConfig::n_points));
    t.push_back(number_entry("dt", &ExperimentConfig::dt));
    t.push_back(number_entry("x0", &ExperimentConfig::x0));
    t.push_back(number_entry("sigma", &ExperimentConfig::sigma));
    t.push_back(number_entry("k0", &ExperimentConfig::k0));
    t.push_back({"mode",
                 [](ExperimentConfig& c, std::string_view v) {
                   v = trim(v);
                   if (v.empty() || v == "auto") {
                     c.mode = std::nullopt;
                   } else {
                     c.mode = ramp_mode_from_string(v);
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return c.mode ? std::string(to_string(*c.mode)) : std::string("auto");
                 }});
    t.push_back(number_entry("x_c", &ExperimentConfig::x_c));
    t.push_back(number_entry("w", &ExperimentConfig::w));
    t.push_back({"V0",
                 [](ExperimentConfig& c, std::string_view v) { c.V0 = HeightValue::parse("V0", v); },
                 [](const ExperimentConfig& c) { return c.V0.str(); }});
    t.push_back(time_entry("t_p", &ExperimentConfig::t_p));
    t.push_back(time_entry("epsilon", &ExperimentConfig::epsilon));
    t.push_back(number_entry("x_prime", &ExperimentConfig::x_prime));
    t.push_back(number_entry("x_double_prime", &ExperimentConfig::x_double_prime));
    t.push_back(number_entry("threshold", &ExperimentConfig::threshold));
    t.push_back(number_entry("persistence", &ExperimentConfig::persistence));
    t.push_back(number_entry("node_floor", &ExperimentConfig::node_floor));
    t.push_back(number_entry("N", &ExperimentConfig::N));
    t.push_back({"sampling",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.sampling = sampling_scheme_from_string(trim(v));
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.sampling)); }});
    t.push_back(number_entry("seed", &ExperimentConfig::seed));
    t.push_back({"D",
                 [](ExperimentConfig& c, std::string_view v) {
                   v = trim(v);
                   if (v.empty() || v == "auto") {
                     c.D = std::nullopt;
                   } else {
                     c.D = parse_double("D", v);
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return c.D ? format_double(*c.D) : std::string("auto");
                 }});
    t.push_back({"output_dir",
                 [](ExperimentConfig& c, std::string_view v) {
                   v = trim(v);
                   if (v.empty()) throw ConfigError("output_dir", "must not be empty");
                   c.output_dir = std::string(v);
                 },
                 [](const ExperimentConfig& c) { return c.output_dir; }});
    t.push_back(number_entry("n_steps", &ExperimentConfig::n_steps));
    t.push_back(number_entry("record_every", &ExperimentConfig::record_every));
    t.push_back(optional_steps_entry("dense_from", &ExperimentConfig::dense_from));
    t.push_back(optional_steps_entry("dense_to", &ExperimentConfig::dense_to));
    t.push_back({"epsilon_list",
                 [](ExperimentConfig& c, std::string_view v) {
                   auto items = split_list(v);
                   // a trailing unit applies to every bare number: "5, 10, 20 steps"
                   std::string_view last = items.back();
                   const bool all_steps = strip_suffix(last, "steps");
                   std::vector<TimeValue> out;
                   for (auto item : items) {
                     auto value = TimeValue::parse("epsilon_list", item);
                     if (all_steps) value.in_steps = true;
                     out.push_back(value);
                   }
                   c.epsilon_list = std::move(out);
                 },
                 [](const ExperimentConfig& c) {
                   std::string s;
                   for (const auto& e : c.epsilon_list) s += (s.empty() ? "" : ", ") + e.str();
                   return s;
                 }});
    t.push_back({"snapshot_steps",
                 [](ExperimentConfig& c, std::string_view v) {
                   std::vector<std::size_t> out;
                   for (auto item : split_list(v))
                     out.push_back(static_cast<std::size_t>(parse_unsigned("snapshot_steps", item)));
                   c.snapshot_steps = std::move(out);
                 },
                 [](const ExperimentConfig& c) {
                   std::string s;
                   for (auto k : c.snapshot_steps) s += (s.empty() ? "" : ", ") + std::to_string(k);
                   return s;
                 }});
    t.push_back(number_entry("trajectory_stride", &ExperimentConfig::trajectory_stride));
    return t;
  }();
  return table;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::reflection_lowering: return "reflection-lowering";
    case ExperimentKind::transmission_raising: return "transmission-raising";
    case ExperimentKind::trajectories: return "trajectories";
    case ExperimentKind::qpotential: return "qpotential";
    case ExperimentKind::sweep: return "sweep";
  }
  return "reflection-lowering";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (auto kind : {ExperimentKind::reflection_lowering, ExperimentKind::transmission_raising,
                    ExperimentKind::trajectories, ExperimentKind::qpotential, ExperimentKind::sweep})
    if (name == to_string(kind)) return kind;
  throw ConfigError("experiment", "unknown experiment '" + std::string(name) + "'");
}

TimeValue TimeValue::parse(const std::string& field, std::string_view text) {
  text = trim(text);
  TimeValue t;
  t.in_steps = strip_suffix(text, "steps") || strip_suffix(text, "step");
  t.amount = parse_double(field, text);
  if (t.amount < 0.0) throw ConfigError(field, "must be >= 0");
  return t;
}

std::string TimeValue::str() const {
  return in_steps ? format_double(amount) + " steps" : format_double(amount);
}

HeightValue HeightValue::parse(const std::string& field, std::string_view text) {
  text = trim(text);
  HeightValue h;
  h.in_units_of_energy = strip_suffix(text, "E");
  if (h.in_units_of_energy && text.empty()) {
    h.amount = 1.0;
  } else {
    h.amount = parse_double(field, text);
  }
  if (h.amount < 0.0) throw ConfigError(field, "must be >= 0");
  return h;
}

std::string HeightValue::str() const {
  return in_units_of_energy ? format_double(amount) + "E" : format_double(amount);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const auto& table = entries();
  const auto it = std::find_if(table.begin(), table.end(),
                               [&](const Entry& e) { return e.key == key; });
  if (it == table.end()) throw ConfigError(std::string(key), "unknown configuration key");
  it->set(config, value);
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    set_value(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  return parse_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) out.emplace_back(e.key, e.get(config));
  return out;
}

double mean_free_energy(const WaveFunction& psi) {
  const auto& a = psi.amplitudes;
  const double inv_dx2 = Units::kinetic_prefactor / (psi.grid.dx() * psi.grid.dx());
  double h = 0.0;
  double norm = 0.0;
  for (std::size_t i = 1; i + 1 < a.size(); ++i) {
    h += std::real(std::conj(a[i]) * (2.0 * a[i] - a[i + 1] - a[i - 1])) * inv_dx2;
    norm += std::norm(a[i]);
  }
  return h / norm;
}

ResolvedConfig resolve(const ExperimentConfig& c) {
  const Grid grid(c.x_min, c.x_max, c.n_points, c.dt);
  const GaussianPacketSpec packet{c.x0, c.sigma, c.k0};
  validate(packet, grid);
  ResolvedConfig r{c, grid, packet, init_gaussian(grid, packet), 0.0, 0.0, {}, {},
                   DetectorKind::reflection, 0.0, 0.0, 0, {}, 0.0};
  const Grid& g = r.grid;

  const bool transmission = c.experiment == ExperimentKind::transmission_raising;
  const RampMode mode = c.mode.value_or(transmission ? RampMode::raising : RampMode::lowering);
  if (transmission && mode == RampMode::lowering)
    throw ConfigError("mode", "transmission-raising needs mode raising or static");
  if (!transmission && mode == RampMode::raising)
    throw ConfigError("mode", std::string(to_string(c.experiment)) + " needs mode lowering or static");

  if (!g.strictly_inside(c.x_prime)) throw ConfigError("x_prime", "detector must lie inside the grid");
  if (!g.strictly_inside(c.x_double_prime))
    throw ConfigError("x_double_prime", "detector must lie inside the grid");
  if (!(c.threshold > 0.0)) throw ConfigError("threshold", "must be positive");
  if (c.persistence < 1) throw ConfigError("persistence", "must be >= 1");
  if (!(c.node_floor > 0.0)) throw ConfigError("node_floor", "must be positive");
  if (c.N < 1) throw ConfigError("N", "need at least one particle");
  if (c.record_every < 1) throw ConfigError("record_every", "must be >= 1");
  if (c.trajectory_stride < 1) throw ConfigError("trajectory_stride", "must be >= 1");

  r.n_steps = c.n_steps != 0 ? c.n_steps : (transmission ? 2000 : 1500);

  r.boundary_tail = gaussian_boundary_tail(g, r.packet);
  r.energy = mean_free_energy(r.psi0);
  r.barrier_height = c.V0.resolve(r.energy);

  const double t_p = c.t_p.resolve(c.dt);
  const double eps = c.epsilon.resolve(c.dt);
  if (c.experiment != ExperimentKind::sweep && mode != RampMode::static_barrier && !(eps > 0.0))
    throw ConfigError("epsilon", "ramp duration must be positive");

  r.reference = BarrierSchedule{c.x_c, c.w, transmission ? 0.0 : r.barrier_height,
                                RampMode::static_barrier, t_p, eps};
  r.perturbed = mode == RampMode::static_barrier
                    ? r.reference
                    : BarrierSchedule{c.x_c, c.w, r.barrier_height, mode, t_p, eps};
  validate(r.reference, g);
  if (c.experiment != ExperimentKind::sweep) validate(r.perturbed, g);

  r.detector_kind = transmission ? DetectorKind::transmission : DetectorKind::reflection;
  r.detector_position = transmission ? c.x_double_prime : c.x_prime;
  r.distance = c.D.value_or(std::abs(c.x_c - r.detector_position));
  if (!(r.distance > 0.0)) throw ConfigError("D", "must be positive");

  if (c.experiment == ExperimentKind::sweep) {
    if (c.epsilon_list.size() < 2) throw ConfigError("epsilon_list", "sweep needs at least two values");
    for (const auto& e : c.epsilon_list)
      if (!(e.resolve(c.dt) > 0.0)) throw ConfigError("epsilon_list", "values must be positive");
  }

  // every step from halfway to the perturbation onwards, sparse before
  const auto onset_steps = static_cast<std::size_t>(std::llround(t_p / c.dt));
  r.plan.record_every = c.record_every;
  r.plan.dense_begin = c.dense_from.value_or(transmission ? 0 : onset_steps / 2);
  r.plan.dense_end = c.dense_to.value_or(r.n_steps + 1);
  if (r.plan.dense_begin > r.plan.dense_end) throw ConfigError("dense_from", "must not exceed dense_to");
  return r;
}

}  // namespace superarrival
