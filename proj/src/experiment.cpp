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

#include "dbmpc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dbmpc {

namespace fs = std::filesystem;

TimingStats summarize_timing(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize_timing: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  auto nearest_rank = [&](double percent) {
    auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
  };
  TimingStats stats;
  double total = 0.0;
  for (double s : samples) total += s;
  stats.mean = total / static_cast<double>(n);
  stats.p95 = nearest_rank(95.0);
  stats.p99 = nearest_rank(99.0);
  stats.max = sorted.back();
  stats.count = n;
  return stats;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string mission(const std::optional<double>& t) { return t ? num(*t) : "none"; }

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& cell, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed number '" + cell + "' in " + path.string());
  }
}

std::ifstream open_for_read(const fs::path& path, std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in || !std::getline(in, header)) {
    throw std::runtime_error("cannot read '" + path.string() + "'");
  }
  return in;
}

}  // namespace

void write_trajectory_csv(const fs::path& path, const std::vector<TrajectorySample>& trajectory) {
  auto out = open_for_write(path);
  out << "t,rx,ry,rz,vx,vy,vz\n";
  for (const auto& sample : trajectory) {
    out << num(sample.t);
    const Vec6& x = sample.state.vector();
    for (int i = 0; i < 6; ++i) out << ',' << num(x[i]);
    out << '\n';
  }
}

void write_actuation_csv(const fs::path& path, const std::vector<ActuationRecord>& log,
                         int thrusters) {
  auto out = open_for_write(path);
  out << "k";
  for (int i = 1; i <= thrusters; ++i) out << ",s" << i;
  out << ",solve_time,iterations,status\n";
  for (const auto& record : log) {
    out << record.step;
    for (Eigen::Index i = 0; i < record.command.size(); ++i) out << ',' << num(record.command[i]);
    out << ',' << num(record.solve_time) << ',' << record.iterations << ','
        << to_string(record.status) << '\n';
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(const fs::path& path) {
  std::string line;
  auto in = open_for_read(path, line);
  if (line != "t,rx,ry,rz,vx,vy,vz") {
    throw std::runtime_error("unexpected trajectory header in " + path.string());
  }
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw std::runtime_error("bad trajectory row in " + path.string());
    Vec6 x;
    for (int i = 0; i < 6; ++i) x[i] = to_double(cells[static_cast<std::size_t>(i) + 1], path);
    rows.push_back({to_double(cells[0], path), LvlhState(x)});
  }
  return rows;
}

std::vector<ActuationRow> read_actuation_csv(const fs::path& path) {
  std::string line;
  auto in = open_for_read(path, line);
  const auto header = split_csv(line);
  if (header.size() < 5 || header.front() != "k" || header.back() != "status") {
    throw std::runtime_error("unexpected actuation header in " + path.string());
  }
  const auto thrusters = static_cast<Eigen::Index>(header.size() - 4);
  std::vector<ActuationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("bad actuation row in " + path.string());
    }
    ActuationRow row;
    row.step = static_cast<int>(to_double(cells[0], path));
    row.command.resize(thrusters);
    for (Eigen::Index i = 0; i < thrusters; ++i) {
      row.command[i] = to_double(cells[static_cast<std::size_t>(i) + 1], path);
    }
    row.solve_time = to_double(cells[static_cast<std::size_t>(thrusters) + 1], path);
    row.iterations = static_cast<int>(to_double(cells[static_cast<std::size_t>(thrusters) + 2], path));
    row.status = cells.back();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string run_file_name(SweepAxis axis, double value, SolverId solver, int rep) {
  std::ostringstream name;
  name << "run_" << to_string(axis) << '=' << format_double(value) << '_' << to_string(solver)
       << '_' << rep << ".csv";
  return name.str();
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, const ExperimentOptions& options) {
  spec.validate();
  const fs::path& out_dir = spec.output_dir;
  fs::create_directories(out_dir);
  open_for_write(out_dir / "config_echo.txt") << format_config(spec);

  std::vector<double> values = spec.values;
  if (values.empty()) values.push_back(0.0);

  struct Job {
    double value;
    SolverId solver;
    int rep;
  };
  std::vector<Job> jobs;
  std::vector<ScenarioConfig> configs;
  for (double value : values) {
    for (SolverId solver : spec.solvers) {
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        ScenarioConfig cfg = spec.scenario_for(value, solver);
        cfg.rng_seed = spec.base.rng_seed + static_cast<std::uint64_t>(rep);
        jobs.push_back({value, solver, rep});
        configs.push_back(std::move(cfg));
      }
    }
  }

  const std::vector<SimResult> results = run_batch(configs, options.threads);

  ExperimentOutcome outcome;
  auto runs = open_for_write(out_dir / "runs.csv");
  runs << "axis,value,solver,rep,status,fuel_s,mission_time_s,message\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Job& job = jobs[j];
    const SimResult& r = results[j];
    const std::string name = run_file_name(spec.axis, job.value, job.solver, job.rep);
    if (options.write_runs) {
      write_trajectory_csv(out_dir / "trajectory" / name, r.trajectory);
      write_actuation_csv(out_dir / "actuation" / name, r.actuation_log,
                          configs[j].thruster_count());
    }
    std::string message = r.fatal_error.value_or("");
    std::replace(message.begin(), message.end(), ',', ';');
    std::replace(message.begin(), message.end(), '\n', ' ');
    runs << to_string(spec.axis) << ',' << format_double(job.value) << ','
         << to_string(job.solver) << ',' << job.rep << ',' << (r.fatal_error ? "fatal" : "ok")
         << ',' << num(r.fuel_consumption) << ',' << mission(r.mission_time) << ',' << message
         << '\n';
    if (r.fatal_error) ++outcome.failed_runs;
  }

  auto summary = open_for_write(out_dir / "summary.csv");
  summary << "axis,value,solver,fuel_s,mission_time_s,acc_solve_time_s,mean_ms,p95_ms,p99_ms\n";
  std::size_t j = 0;
  for (double value : values) {
    for (SolverId solver : spec.solvers) {
      SummaryRow row{spec.axis, value, solver, 0.0, std::nullopt, 0.0, {}, true};
      std::vector<double> samples;
      for (int rep = 0; rep < spec.repetitions; ++rep, ++j) {
        const SimResult& r = results[j];
        if (rep == 0) {
          row.fuel = r.fuel_consumption;
          row.mission_time = r.mission_time;
          row.accumulated_solve_time = r.accumulated_solve_time();
        }
        row.all_runs_ok = row.all_runs_ok && !r.fatal_error;
        samples.insert(samples.end(), r.solve_times.begin(), r.solve_times.end());
      }
      if (!samples.empty()) row.timing = summarize_timing(samples);
      summary << to_string(spec.axis) << ',' << format_double(value) << ',' << to_string(solver)
              << ',' << num(row.fuel) << ',' << mission(row.mission_time) << ','
              << num(row.accumulated_solve_time) << ',' << num(1e3 * row.timing.mean) << ','
              << num(1e3 * row.timing.p95) << ',' << num(1e3 * row.timing.p99) << '\n';
      outcome.summary.push_back(row);
    }
  }
  outcome.exit_code = outcome.failed_runs > 0 ? kExitRunFatal : kExitOk;
  return outcome;
}

}  // namespace dbmpc
