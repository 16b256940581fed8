// Copyright 2026 The dbmpc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dbmpc/config_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace dbmpc {

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kMinActivation: return "h_min";
    case SweepAxis::kHorizon: return "horizon";
    case SweepAxis::kSolverCrossProduct: return "solver";
  }
  return "none";
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto end = value.find_first_of(",;", start);
    const auto item = trim(value.substr(start, end == std::string_view::npos ? end : end - start));
    if (!item.empty()) items.push_back(item);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return items;
}

double parse_number(const std::string& key, std::string_view text) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key, "expected a plain number in SI units, got '" + std::string(text) + "'");
  }
  if (!std::isfinite(value)) throw ConfigError(key, "value must be finite");
  return value;
}

long parse_integer(const std::string& key, std::string_view text) {
  const double value = parse_number(key, text);
  if (value != std::floor(value) || std::abs(value) > 9.0e15) {
    throw ConfigError(key, "expected an integer, got '" + std::string(text) + "'");
  }
  return static_cast<long>(value);
}

std::vector<double> parse_numbers(const std::string& key, std::string_view text) {
  std::vector<double> values;
  for (auto item : split_list(text)) values.push_back(parse_number(key, item));
  return values;
}

}  // namespace

ScenarioConfig ExperimentSpec::scenario_for(double value, SolverId solver) const {
  ScenarioConfig cfg = base;
  cfg.solver = solver;
  switch (axis) {
    case SweepAxis::kMinActivation: cfg.min_activation = value; break;
    case SweepAxis::kHorizon: cfg.horizon = static_cast<int>(value); break;
    case SweepAxis::kNone:
    case SweepAxis::kSolverCrossProduct: break;
  }
  return cfg;
}

void ExperimentSpec::validate() const {
  base.validate();
  if (repetitions < 1) throw ConfigError("repetitions", "must be at least 1");
  if (solvers.empty()) throw ConfigError("solvers", "at least one solver is required");
  if (axis == SweepAxis::kMinActivation || axis == SweepAxis::kHorizon) {
    if (values.empty()) throw ConfigError("sweep_values", "a sweep needs at least one value");
  }
  for (double v : values) {
    if (axis == SweepAxis::kHorizon && v != std::floor(v)) {
      throw ConfigError("sweep_values", "horizon values must be integers");
    }
    try {
      scenario_for(v, solvers.front()).validate();
    } catch (const ConfigError& e) {
      throw ConfigError("sweep_values", "value " + format_double(v) + " is invalid (" + e.what() + ")");
    }
  }
}

ExperimentSpec parse_config(std::string_view text) {
  ExperimentSpec spec;
  ScenarioConfig& cfg = spec.base;
  std::optional<long> thruster_count;
  bool have_linearization_point = false;
  bool have_solvers = false;

  using Handler = std::function<void(const std::string&, std::string_view)>;
  auto scalar = [](double& target) -> Handler {
    return [&target](const std::string& key, std::string_view v) { target = parse_number(key, v); };
  };
  std::map<std::string, Handler, std::less<>> handlers = {
      {"gravitational_constant", scalar(cfg.gravitational_constant)},
      {"earth_mass", scalar(cfg.earth_mass)},
      {"target_orbit_radius", scalar(cfg.target_orbit_radius)},
      {"chaser_mass", scalar(cfg.chaser_mass)},
      {"min_activation", scalar(cfg.min_activation)},
      {"sampling_period", scalar(cfg.sampling_period)},
      {"sim_duration", scalar(cfg.sim_duration)},
      {"qp_tolerance", scalar(cfg.qp_tolerance)},
      {"qp_regularization", scalar(cfg.qp_regularization)},
      {"bnb_gap_tolerance", scalar(cfg.bnb_gap_tolerance)},
      {"initial_state_perturbation", scalar(cfg.initial_state_perturbation)},
      {"linearization_point",
       [&](const std::string& key, std::string_view v) {
         cfg.linearization_point = parse_number(key, v);
         have_linearization_point = true;
       }},
      {"thruster_count",
       [&](const std::string& key, std::string_view v) { thruster_count = parse_integer(key, v); }},
      {"thrust_forces",
       [&](const std::string& key, std::string_view v) {
         const auto values = parse_numbers(key, v);
         if (values.empty() || values.size() % 3 != 0) {
           throw ConfigError(key, "expected 3 values (N, LVLH x y z) per thruster");
         }
         cfg.thrust_forces.clear();
         for (std::size_t i = 0; i < values.size(); i += 3) {
           cfg.thrust_forces.emplace_back(values[i], values[i + 1], values[i + 2]);
         }
       }},
      {"state_weight",
       [&](const std::string& key, std::string_view v) {
         const auto values = parse_numbers(key, v);
         if (values.size() == 6) {
           cfg.state_weight = Vec6(Eigen::Map<const Vec6>(values.data())).asDiagonal();
         } else if (values.size() == 36) {
           cfg.state_weight = Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(
               values.data());
         } else {
           throw ConfigError(key, "expected 6 diagonal or 36 row-major values");
         }
       }},
      {"initial_state",
       [&](const std::string& key, std::string_view v) {
         const auto values = parse_numbers(key, v);
         if (values.size() != 6) throw ConfigError(key, "expected 6 values (rx ry rz vx vy vz)");
         cfg.initial_state = LvlhState(Vec6(Eigen::Map<const Vec6>(values.data())));
       }},
      {"horizon",
       [&](const std::string& key, std::string_view v) {
         cfg.horizon = static_cast<int>(parse_integer(key, v));
       }},
      {"qp_max_iterations",
       [&](const std::string& key, std::string_view v) {
         cfg.qp_max_iterations = static_cast<int>(parse_integer(key, v));
       }},
      {"bnb_node_budget",
       [&](const std::string& key, std::string_view v) {
         cfg.bnb_node_budget = static_cast<int>(parse_integer(key, v));
       }},
      {"rng_seed",
       [&](const std::string& key, std::string_view v) {
         const long seed = parse_integer(key, v);
         if (seed < 0) throw ConfigError(key, "must be non-negative");
         cfg.rng_seed = static_cast<std::uint64_t>(seed);
       }},
      {"solver", [&](const std::string&, std::string_view v) { cfg.solver = parse_solver_id(v); }},
      {"solvers",
       [&](const std::string& key, std::string_view v) {
         spec.solvers.clear();
         for (auto item : split_list(v)) {
           try {
             spec.solvers.push_back(parse_solver_id(item));
           } catch (const ConfigError& e) {
             throw ConfigError(key, e.what());
           }
         }
         have_solvers = true;
       }},
      {"sweep_axis",
       [&](const std::string& key, std::string_view v) {
         if (v == "none") spec.axis = SweepAxis::kNone;
         else if (v == "h_min") spec.axis = SweepAxis::kMinActivation;
         else if (v == "horizon") spec.axis = SweepAxis::kHorizon;
         else if (v == "solver") spec.axis = SweepAxis::kSolverCrossProduct;
         else throw ConfigError(key, "expected none, h_min, horizon or solver");
       }},
      {"sweep_values",
       [&](const std::string& key, std::string_view v) { spec.values = parse_numbers(key, v); }},
      {"repetitions",
       [&](const std::string& key, std::string_view v) {
         spec.repetitions = static_cast<int>(parse_integer(key, v));
       }},
      {"output_dir",
       [&](const std::string& key, std::string_view v) {
         if (v.empty()) throw ConfigError(key, "must not be empty");
         spec.output_dir = std::string(v);
       }},
  };

  std::map<std::string, int, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(view.substr(0, eq)));
    const std::string_view value = trim(view.substr(eq + 1));
    const auto handler = handlers.find(key);
    if (handler == handlers.end()) throw ConfigError(key, "unknown key");
    if (seen[key]++ > 0) throw ConfigError(key, "given more than once");
    if (value.empty()) throw ConfigError(key, "missing value");
    handler->second(key, value);
  }

  if (thruster_count && *thruster_count != cfg.thruster_count()) {
    throw ConfigError("thruster_count", "does not match the number of thrust_forces entries");
  }
  if (!have_linearization_point) cfg.linearization_point = 0.5 * cfg.sampling_period;
  if (!have_solvers) spec.solvers = {cfg.solver};
  if (spec.axis == SweepAxis::kNone || spec.axis == SweepAxis::kSolverCrossProduct) {
    if (!spec.values.empty()) {
      throw ConfigError("sweep_values", "only meaningful with sweep_axis h_min or horizon");
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const ExperimentSpec& spec) {
  const ScenarioConfig& c = spec.base;
  std::ostringstream out;
  auto list = [&](auto begin, auto end) {
    std::string s;
    for (auto it = begin; it != end; ++it) {
      if (!s.empty()) s += ", ";
      s += format_double(*it);
    }
    return s;
  };
  out << "gravitational_constant = " << format_double(c.gravitational_constant) << "\n";
  out << "earth_mass = " << format_double(c.earth_mass) << "\n";
  out << "target_orbit_radius = " << format_double(c.target_orbit_radius) << "\n";
  out << "chaser_mass = " << format_double(c.chaser_mass) << "\n";
  out << "thruster_count = " << c.thruster_count() << "\n";
  std::vector<double> forces;
  for (const auto& f : c.thrust_forces) forces.insert(forces.end(), {f.x(), f.y(), f.z()});
  out << "thrust_forces = " << list(forces.begin(), forces.end()) << "\n";
  std::vector<double> weight;
  for (int r = 0; r < 6; ++r) {
    for (int k = 0; k < 6; ++k) weight.push_back(c.state_weight(r, k));
  }
  out << "state_weight = " << list(weight.begin(), weight.end()) << "\n";
  out << "min_activation = " << format_double(c.min_activation) << "\n";
  out << "sampling_period = " << format_double(c.sampling_period) << "\n";
  out << "sim_duration = " << format_double(c.sim_duration) << "\n";
  out << "linearization_point = " << format_double(c.linearization_point) << "\n";
  const Vec6& x0 = c.initial_state.vector();
  out << "initial_state = " << list(x0.data(), x0.data() + 6) << "\n";
  out << "horizon = " << c.horizon << "\n";
  out << "solver = " << to_string(c.solver) << "\n";
  out << "qp_tolerance = " << format_double(c.qp_tolerance) << "\n";
  out << "qp_max_iterations = " << c.qp_max_iterations << "\n";
  out << "qp_regularization = " << format_double(c.qp_regularization) << "\n";
  out << "bnb_gap_tolerance = " << format_double(c.bnb_gap_tolerance) << "\n";
  out << "bnb_node_budget = " << c.bnb_node_budget << "\n";
  out << "rng_seed = " << c.rng_seed << "\n";
  out << "initial_state_perturbation = " << format_double(c.initial_state_perturbation) << "\n";
  out << "sweep_axis = " << to_string(spec.axis) << "\n";
  if (!spec.values.empty()) {
    out << "sweep_values = " << list(spec.values.begin(), spec.values.end()) << "\n";
  }
  std::string solvers;
  for (auto id : spec.solvers) {
    if (!solvers.empty()) solvers += ", ";
    solvers += to_string(id);
  }
  out << "solvers = " << solvers << "\n";
  out << "repetitions = " << spec.repetitions << "\n";
  out << "output_dir = " << spec.output_dir.string() << "\n";
  return out.str();
}

}  // namespace dbmpc
