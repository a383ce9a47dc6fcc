#include "bisar/harness.hpp"

#include "bisar/log.hpp"
#include "bisar/power.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bisar {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> preset_names() { return {"turn30", "turn200", "staircase30", "square100", "random100"}; }

Scenario make_preset(const std::string& name, const PresetOverrides& ov) {
  Scenario sc = default_scenario();
  auto& src = sc.source;
  if (name == "turn30" || name == "turn200") {
    src.pattern = "turn";
    src.spacing = name == "turn30" ? 30.0 : 200.0;
    src.count = 30;
    sc.T_w = 600;
  } else if (name == "staircase30") {
    src.pattern = "staircase";
    src.spacing = 30.0;
    src.count = 40;
    sc.T_w = 1200;
  } else if (name == "square100") {
    src.pattern = "square";
    src.spacing = 100.0;
    src.count = 40;
    sc.T_w = 1200;
  } else if (name == "random100") {
    src.pattern = "random";
    src.spacing = 100.0;
    src.count = 30;
    src.seed = ov.seed;
    sc.T_w = 600;
  } else {
    throw ScenarioError("unknown preset '" + name + "'");
  }
  if (ov.spacing) src.spacing = *ov.spacing;
  if (ov.altitude) sc.sar.H = *ov.altitude;
  src.hold = sc.T_w / src.count;
  src.hold_defaulted = false;
  // emit an explicit list so the file is self-contained
  std::string text = serialize_scenario(sc);
  Scenario gen = parse_scenario(text);
  gen.source.pattern = "list";
  return parse_scenario(serialize_scenario(gen));
}

namespace {

std::string num(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const Scenario& sc, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "t_index,t_s,x_m,y_m,V_mps,w,u,cx_m,cy_m,power_W,energy_J\n";
  f << "0,0," << num(traj.positions[0].x()) << "," << num(traj.positions[0].y()) << ",0,0,0,0,0,0,0\n";
  const auto st = sensing_states(traj, sc);
  for (int t = 0; t < traj.slots(); ++t) {
    f << t + 1 << "," << num((t + 1) * sc.delta) << "," << num(traj.positions[t + 1].x()) << ","
      << num(traj.positions[t + 1].y()) << "," << num(traj.V[t]) << "," << num(traj.w[t]) << "," << num(traj.u[t])
      << "," << num(st[t].center.x()) << "," << num(st[t].center.y()) << "," << num(traj.power[t]) << ","
      << num(traj.power[t] * sc.delta) << "\n";
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(f, line);
  if (line.rfind("t_index,", 0) != 0) throw std::runtime_error(path + ": missing trajectory header");
  Trajectory tr;
  int expect = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 11) throw std::runtime_error(path + ": expected 11 columns");
    if (static_cast<int>(v[0]) != expect) throw std::runtime_error(path + ": t_index out of sequence");
    tr.positions.emplace_back(v[2], v[3]);
    if (expect > 0) {
      tr.V.push_back(v[4]);
      tr.w.push_back(v[5]);
      tr.u.push_back(v[6]);
      tr.power.push_back(v[9]);
      tr.total_energy += v[10];
    }
    ++expect;
  }
  if (tr.positions.size() < 2) throw std::runtime_error(path + ": no slots");
  tr.q.assign(tr.V.size(), 0.0);
  return tr;
}

json feasibility_json(const FeasibilityReport& rep) {
  json per = json::object();
  for (const auto& c : rep.checks)
    per[c.name] = {{"pass", c.pass}, {"worst_margin", c.worst_margin}, {"worst_slot", c.worst_slot}};
  return {{"pass", rep.pass},
          {"per_constraint", per},
          {"min_speed_mps", rep.min_speed},
          {"max_heading_residual", rep.max_heading_residual},
          {"carried_heading_slots", rep.carried_heading_slots}};
}

json report_json(const PlanResult& res) {
  const auto& r = res.report;
  json its = json::array();
  for (const auto& it : r.iterations)
    its.push_back({{"iter", it.iter},
                   {"objective_J", it.objective_J},
                   {"distance_m", it.distance_m},
                   {"surrogate", it.surrogate},
                   {"trajectory_step_status", it.step_status},
                   {"newton_iterations", it.newton_iterations},
                   {"feasibility_max_slack_m", it.max_slack},
                   {"step_norm_m", it.step_norm}});
  return {{"planner", r.planner},
          {"iterations", its},
          {"converged", r.converged},
          {"stop_reason", r.stop_reason},
          {"slack_warning", r.slack_warning},
          {"restoration_iterations", r.restoration_iterations},
          {"initial_energy_J", r.initial_energy_J},
          {"total_energy_J", res.traj.total_energy},
          {"total_distance_m", total_distance(res.traj)},
          {"max_unity_residual", r.max_unity_residual},
          {"wallclock_s", r.wallclock_s},
          {"feasibility", feasibility_json(r.feasibility)}};
}

json dmin_json(const DminResult& r) {
  json j = {{"method", to_string(r.method)}, {"value_m", r.value}};
  if (r.stderr_m) j["stderr_m"] = *r.stderr_m;
  if (r.method != CdfMethod::monte_carlo) j["error_estimate_m"] = r.error_estimate;
  return j;
}

double per_slot_energy_stddev(const Trajectory& traj, const Scenario& sc) {
  const int T = traj.slots();
  double m = 0.0, s2 = 0.0;
  for (int t = 0; t < T; ++t) m += traj.power[t] * sc.delta;
  m /= T;
  for (int t = 0; t < T; ++t) {
    const double d = traj.power[t] * sc.delta - m;
    s2 += d * d;
  }
  return std::sqrt(s2 / T);
}

namespace {

void write_plotdata(const PlanResult& res, const Scenario& sc, const fs::path& dir, int every) {
  std::ofstream p(dir / "power_vs_time.csv");
  p << "t_s,power_W,energy_J\n";
  for (int t = 0; t < res.traj.slots(); ++t)
    p << num((t + 1) * sc.delta) << "," << num(res.traj.power[t]) << "," << num(res.traj.power[t] * sc.delta) << "\n";
  std::ofstream c(dir / "sensing_circles.csv");
  c << "t_index,x_m,y_m,cx_m,cy_m,radius_m,landmark_x_m,landmark_y_m\n";
  const auto st = sensing_states(res.traj, sc);
  for (int t = 0; t < res.traj.slots(); t += std::max(1, every))
    c << t + 1 << "," << num(st[t].q.x()) << "," << num(st[t].q.y()) << "," << num(st[t].center.x()) << ","
      << num(st[t].center.y()) << "," << num(sc.sar.r_s) << "," << num(sc.landmarks[t].x()) << ","
      << num(sc.landmarks[t].y()) << "\n";
}

PlanResult run_one(const Scenario& sc, const std::string& algo, const PlannerOptions& opt) {
  return algo == "baseline" ? plan_baseline(sc, opt) : plan_sca_bcd(sc, opt);
}

}  // namespace

ExperimentResult run_experiment(const Scenario& sc, const std::string& scenario_id, const RunConfig& cfg) {
  ExperimentResult ex;
  ex.scenario_id = scenario_id;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  std::vector<std::string> algos;
  if (cfg.algo == "both") algos = {"sca", "baseline"};
  else algos = {cfg.algo};

  for (const auto& a : algos) {
    PlannerRun run;
    run.name = a == "baseline" ? "baseline" : "proposed";
    run.dir = (out / run.name).string();
    fs::create_directories(run.dir);
    PlannerOptions opt = cfg.planner;
    if (!opt.dump_dir.empty()) opt.dump_dir = (fs::path(opt.dump_dir) / run.name).string();
    try {
      run.result = run_one(sc, a, opt);
    } catch (const PlannerError& e) {
      log_error(run.name + ": " + e.what());
      throw;
    }
    write_trajectory_csv(run.result.traj, sc, (fs::path(run.dir) / "trajectory.csv").string());
    std::ofstream(fs::path(run.dir) / "report.json") << report_json(run.result).dump(2) << "\n";
    write_plotdata(run.result, sc, run.dir, cfg.circle_every);
    ex.runs.push_back(std::move(run));
  }

  json summary = {{"scenario", scenario_id}, {"seed", cfg.seed}};
  json runs = json::array();
  for (const auto& r : ex.runs)
    runs.push_back({{"planner", r.name},
                    {"trajectory_file", (fs::path(r.name) / "trajectory.csv").string()},
                    {"total_energy_J", r.result.traj.total_energy},
                    {"per_slot_energy_stddev_J", per_slot_energy_stddev(r.result.traj, sc)},
                    {"iterations", static_cast<int>(r.result.report.iterations.size()) - 1},
                    {"converged", r.result.report.converged},
                    {"wallclock_s", r.result.report.wallclock_s},
                    {"feasible", r.result.report.feasibility.pass}});
  summary["runs"] = runs;
  if (ex.runs.size() == 2 && ex.runs[0].result.report.converged && ex.runs[1].result.report.converged) {
    ex.energy_saving_fraction = 1.0 - ex.runs[0].result.traj.total_energy / ex.runs[1].result.traj.total_energy;
    summary["energy_saving_fraction"] = *ex.energy_saving_fraction;
  } else {
    summary["energy_saving_fraction"] = nullptr;
  }

  // extra random realizations for the averaged per-slot energy series
  if (cfg.realizations > 1) {
    if (sc.source.pattern != "random")
      throw ScenarioError("realizations > 1 needs a random landmark pattern");
    const int T = sc.T_w;
    ex.realizations = cfg.realizations;
    std::vector<std::vector<double>> sums(algos.size(), std::vector<double>(T, 0.0));
    json energies = json::array();
    for (int k = 0; k < cfg.realizations; ++k) {
      Scenario sk = sc;
      sk.source.seed = cfg.seed + k;
      sk = parse_scenario(serialize_scenario(sk));
      json row = {{"seed", sk.source.seed}};
      for (size_t i = 0; i < algos.size(); ++i) {
        auto r = run_one(sk, algos[i], cfg.planner);
        for (int t = 0; t < T; ++t) sums[i][t] += r.traj.power[t] * sc.delta;
        row[algos[i] == "baseline" ? "baseline_J" : "proposed_J"] = r.traj.total_energy;
      }
      energies.push_back(row);
    }
    std::ofstream m(out / "mean_energy_series.csv");
    m << "t_s";
    for (const auto& a : algos) m << "," << (a == "baseline" ? "baseline" : "proposed") << "_mean_energy_J";
    m << "\n";
    for (int t = 0; t < T; ++t) {
      m << num((t + 1) * sc.delta);
      for (size_t i = 0; i < algos.size(); ++i) m << "," << num(sums[i][t] / cfg.realizations);
      m << "\n";
    }
    ex.mean_energy_series.resize(T);
    for (int t = 0; t < T; ++t) ex.mean_energy_series[t] = sums[0][t] / cfg.realizations;
    summary["realizations"] = energies;
  }
  std::ofstream(out / "experiment.json") << summary.dump(2) << "\n";
  return ex;
}

}  // namespace bisar
