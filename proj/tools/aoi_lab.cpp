// aoi_lab: analytic solvers, simulator, and optimizers for multi-source
// multi-server status-update networks, wired to JSON/CSV for scripting.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoi/errors.hpp"
#include "aoi/heterogeneous.hpp"
#include "aoi/homogeneous.hpp"
#include "aoi/io.hpp"
#include "aoi/model.hpp"
#include "aoi/parallel.hpp"
#include "aoi/sim.hpp"

namespace {

using aoi::Error;
using aoi::ErrorCode;
using aoi::model::NetworkSpec;
using aoi::model::QueueDiscipline;
using aoi::model::Regime;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedRegime:
    case ErrorCode::UnsupportedN:
      return 3;
    case ErrorCode::SingularSystem:
    case ErrorCode::StructureMismatch:
      return 4;
    default:
      return 2;
  }
}

NetworkSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open spec file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return aoi::model::validate(aoi::io::parse_spec_text(buf.str()));
}

QueueDiscipline parse_discipline(const std::string& name) {
  if (name == "lcfs") return QueueDiscipline::LCFS;
  if (name == "lcfs_w" || name == "lcfs-w") return QueueDiscipline::LCFS_W;
  if (name == "fcfs") return QueueDiscipline::FCFS;
  throw Error(ErrorCode::ParseError, "unknown discipline: " + name);
}

aoi::heterogeneous::HeteroParams hetero_params(const NetworkSpec& spec) {
  aoi::heterogeneous::HeteroParams p;
  p.n = spec.n;
  for (int j = 0; j < spec.n; ++j) {
    p.lambdas.push_back(spec.arrival(j, 0));
    p.mus.push_back(spec.service(j));
  }
  return p;
}

aoi::homogeneous::HomoMultiParams homo_params(const NetworkSpec& spec, int source) {
  aoi::homogeneous::HomoMultiParams p;
  p.n = spec.n;
  p.mu = spec.service(0);
  p.lambda1 = spec.arrival(0, source);
  for (int i = 0; i < spec.m; ++i) {
    if (i != source) p.lambda_bar += spec.arrival(0, i);
  }
  return p;
}

struct AnalyticResult {
  std::string method;
  std::vector<double> aoi;
};

std::vector<double> dense_ages(const NetworkSpec& spec) {
  std::vector<double> ages;
  if (spec.regime == Regime::HomogeneousSingleSource ||
      spec.regime == Regime::HomogeneousMultiSource) {
    for (int i = 0; i < spec.m; ++i) {
      ages.push_back(
          aoi::homogeneous::correlation_vector_multi_dense(homo_params(spec, i)).average_age());
    }
    return ages;
  }
  if (spec.m != 1) {
    throw Error(ErrorCode::UnsupportedRegime,
                "no analytic method covers heterogeneous multi-source networks; "
                "use the simulate subcommand");
  }
  const auto sys = aoi::heterogeneous::build_system(hetero_params(spec));
  const auto v = aoi::heterogeneous::solve_dense(sys);
  double total = 0.0;
  for (std::size_t rank = 0; rank < sys.states.size(); ++rank) {
    total += v[static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(rank), 0))];
  }
  return {total};
}

AnalyticResult analytic_ages(const NetworkSpec& spec, const std::string& method) {
  AnalyticResult result;
  const Regime regime = spec.regime;
  std::string chosen = method;
  if (chosen == "auto") {
    switch (regime) {
      case Regime::HomogeneousSingleSource:
        chosen = "closed";
        break;
      case Regime::HomogeneousMultiSource:
        chosen = spec.n == 2 ? "closed" : (spec.n == 1 ? "dense" : "recursion");
        break;
      case Regime::HeterogeneousSingleSource:
        chosen = "structured";
        break;
      default:
        throw Error(ErrorCode::UnsupportedRegime,
                    "no analytic method covers heterogeneous multi-source networks; "
                    "use the simulate subcommand");
    }
  }

  if (chosen == "closed") {
    result.method = "closed_form";
    if (regime == Regime::HomogeneousSingleSource) {
      result.aoi = {aoi::homogeneous::average_age_single(
          {spec.n, spec.arrival(0, 0), spec.service(0)})};
    } else if (regime == Regime::HomogeneousMultiSource && spec.n == 2) {
      std::vector<double> rates;
      for (int i = 0; i < spec.m; ++i) rates.push_back(spec.arrival(0, i));
      result.aoi = aoi::homogeneous::average_age_two_servers(rates, spec.service(0));
    } else if (regime == Regime::HeterogeneousSingleSource && spec.n == 2) {
      result.aoi = {aoi::heterogeneous::average_age_two_servers(
          spec.arrival(0, 0), spec.arrival(1, 0), spec.service(0), spec.service(1))};
    } else {
      throw Error(ErrorCode::UnsupportedRegime,
                  "no closed form for this regime and server count");
    }
  } else if (chosen == "recursion") {
    if (regime != Regime::HomogeneousMultiSource || spec.n < 3) {
      throw Error(ErrorCode::UnsupportedRegime,
                  "the recursion covers homogeneous multi-source networks with n >= 3");
    }
    result.method = "recursion";
    for (int i = 0; i < spec.m; ++i) {
      const auto p = homo_params(spec, i);
      try {
        result.aoi.push_back(aoi::homogeneous::average_age_multi(p));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateLambdaBar) throw;
        result.aoi.push_back(
            aoi::homogeneous::average_age_single({p.n, p.lambda1, p.mu}));
      }
    }
  } else if (chosen == "structured") {
    if (spec.m != 1) {
      throw Error(ErrorCode::UnsupportedRegime,
                  "the structured solver covers single-source networks; "
                  "use the simulate subcommand");
    }
    result.method = "structured";
    result.aoi = {aoi::heterogeneous::solve_structured(hetero_params(spec)).aoi};
  } else if (chosen == "dense") {
    result.method = "dense_oracle";
    result.aoi = dense_ages(spec);
  } else {
    throw Error(ErrorCode::ParseError, "unknown method: " + method);
  }
  return result;
}

json base_record(const NetworkSpec& spec) {
  return json{{"spec_hash", aoi::io::spec_hash(spec)},
              {"regime", aoi::model::regime_name(spec.regime)},
              {"m", spec.m},
              {"n", spec.n}};
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::fabs(a[i] - b[i]) / std::fabs(b[i]));
  }
  return worst;
}

struct GridSpec {
  std::string param;
  double start = 0.0, stop = 0.0, step = 0.0;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorCode::BadRange, "--vary expects param=start:stop:step");
  }
  g.param = text.substr(0, eq);
  const std::string range = text.substr(eq + 1);
  if (std::sscanf(range.c_str(), "%lf:%lf:%lf", &g.start, &g.stop, &g.step) != 3 ||
      !(g.step > 0.0) || g.stop < g.start) {
    throw Error(ErrorCode::BadRange, "bad range: " + range);
  }
  return g;
}

std::vector<double> grid_values(const GridSpec& g) {
  std::vector<double> values;
  for (double x = g.start; x <= g.stop + 0.5 * g.step; x += g.step) values.push_back(x);
  if (values.empty()) throw Error(ErrorCode::BadRange, "empty grid");
  return values;
}

struct SimFlags {
  std::string discipline = "lcfs";
  double horizon = 1e5;
  double warmup = -1.0;  // default 5% of horizon
  std::uint64_t seed = 1;
  int reps = 1;

  aoi::sim::SimConfig config(const NetworkSpec& spec) const {
    aoi::sim::SimConfig cfg;
    cfg.spec = spec;
    cfg.discipline = parse_discipline(discipline);
    cfg.horizon = horizon;
    cfg.warmup = warmup < 0.0 ? 0.05 * horizon : warmup;
    cfg.seed = seed;
    cfg.replications = reps;
    return cfg;
  }
};

void add_sim_flags(CLI::App* cmd, SimFlags& flags) {
  cmd->add_option("--discipline", flags.discipline, "lcfs | lcfs_w | fcfs")
      ->default_val("lcfs");
  cmd->add_option("--horizon", flags.horizon, "simulated time span")->default_val(1e5);
  cmd->add_option("--warmup", flags.warmup, "discarded leading time (default 5% of horizon)");
  cmd->add_option("--seed", flags.seed, "RNG seed")->default_val(1);
  cmd->add_option("--reps", flags.reps, "independent replications")->default_val(1);
}

json sim_record(const NetworkSpec& spec, const SimFlags& flags) {
  const aoi::sim::SimConfig cfg = flags.config(spec);
  const aoi::sim::SimOutcome out = aoi::sim::simulate(cfg);
  json rec = base_record(spec);
  rec["method"] = "simulation";
  rec["discipline"] = aoi::model::discipline_name(cfg.discipline);
  rec["seed"] = cfg.seed;
  rec["replications"] = cfg.replications;
  rec["horizon"] = cfg.horizon;
  rec["warmup"] = cfg.warmup;
  rec["aoi"] = out.mean_aoi;
  rec["ci_halfwidth"] = out.ci_halfwidth;
  rec["counters"] = json{{"arrivals", out.counters.arrivals},
                         {"deliveries", out.counters.deliveries},
                         {"useful_deliveries", out.counters.useful_deliveries},
                         {"preemptions", out.counters.preemptions}};
  rec["stability_warning"] = out.stability_warning;
  return rec;
}

// --- sweep -----------------------------------------------------------------

NetworkSpec spec_for_grid_point(const NetworkSpec& tmpl, const GridSpec& grid, double value) {
  NetworkSpec s = tmpl;
  if (grid.param == "n") {
    const int n = static_cast<int>(std::lround(value));
    if (n < 1) throw Error(ErrorCode::BadRange, "n must be >= 1");
    if (tmpl.regime != Regime::HomogeneousSingleSource &&
        tmpl.regime != Regime::HomogeneousMultiSource) {
      throw Error(ErrorCode::BadRange, "varying n needs a homogeneous template");
    }
    // hold each source's total arrival rate fixed while the server count moves
    s.n = n;
    s.arrival_rates.assign(static_cast<std::size_t>(n), tmpl.arrival_rates[0]);
    for (auto& row : s.arrival_rates) {
      for (double& rate : row) rate = rate * tmpl.n / n;
    }
    s.service_rates.assign(static_cast<std::size_t>(n), tmpl.service_rates[0]);
  } else if (grid.param == "lambda") {
    if (tmpl.m != 1) {
      throw Error(ErrorCode::BadRange, "varying lambda needs a single-source template");
    }
    for (auto& row : s.arrival_rates) row[0] = value;
  } else if (grid.param == "lambda1") {
    if (tmpl.m != 2) {
      throw Error(ErrorCode::BadRange, "varying lambda1 needs a two-source template");
    }
    const double total = tmpl.arrival(0, 0) + tmpl.arrival(0, 1);
    if (!(value > 0.0) || !(value < total)) {
      throw Error(ErrorCode::BadRange, "lambda1 must stay inside (0, template total)");
    }
    for (auto& row : s.arrival_rates) {
      row[0] = value;
      row[1] = total - value;
    }
  } else {
    throw Error(ErrorCode::BadRange, "unknown sweep parameter: " + grid.param);
  }
  return aoi::model::validate(s);
}

struct SweepRow {
  double param;
  int source;
  double aoi;
  std::string method;
  double ci_halfwidth;
};

int run_sweep(const NetworkSpec& tmpl, const GridSpec& grid, const std::string& method,
              const SimFlags& flags, const std::string& output) {
  const std::vector<double> values = grid_values(grid);
  std::vector<std::vector<SweepRow>> rows(values.size());
  std::vector<std::optional<Error>> failures(values.size());

  const bool simulate = method == "simulate" || (method == "auto" && flags.discipline != "lcfs");
  aoi::parallel::parallel_for(values.size(), [&](std::size_t g) {
    try {
      const NetworkSpec spec = spec_for_grid_point(tmpl, grid, values[g]);
      if (simulate) {
        SimFlags point_flags = flags;
        point_flags.seed = flags.seed + g;  // decorrelated grid points
        const auto out = aoi::sim::simulate(point_flags.config(spec));
        for (int i = 0; i < spec.m; ++i) {
          rows[g].push_back({values[g], i + 1, out.mean_aoi[static_cast<std::size_t>(i)],
                             "simulation", out.ci_halfwidth[static_cast<std::size_t>(i)]});
        }
      } else {
        const AnalyticResult r = analytic_ages(spec, method == "simulate" ? "auto" : method);
        for (int i = 0; i < spec.m; ++i) {
          rows[g].push_back({values[g], i + 1, r.aoi[static_cast<std::size_t>(i)], r.method, 0.0});
        }
      }
    } catch (const Error& e) {
      failures[g] = e;
    }
  });
  for (const auto& failure : failures) {
    if (failure) throw *failure;
  }

  std::ostringstream csv;
  csv << "param,source,aoi,method,ci_halfwidth\n";
  for (const auto& point : rows) {
    for (const SweepRow& row : point) {
      csv << aoi::io::format_number(row.param) << ',' << row.source << ','
          << aoi::io::format_number(row.aoi) << ',' << row.method << ','
          << aoi::io::format_number(row.ci_halfwidth) << '\n';
    }
  }
  if (output.empty() || output == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream out(output);
    if (!out) throw Error(ErrorCode::ParseError, "cannot open output file: " + output);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average age of information for multi-source multi-server networks"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string method = "auto";
  bool self_check = false;
  bool timing = false;
  app.add_flag("--timing", timing, "include wall-clock seconds in records");

  auto* analytic = app.add_subcommand("analytic", "solve a network analytically");
  analytic->add_option("spec", spec_path, "network spec JSON file")->required();
  analytic->add_option("--method", method, "auto | closed | recursion | structured | dense")
      ->default_val("auto");
  analytic->add_flag("--self-check", self_check,
                     "cross-check the result against the dense oracle");

  SimFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "estimate ages by discrete-event simulation");
  simulate->add_option("spec", spec_path, "network spec JSON file")->required();
  add_sim_flags(simulate, sim_flags);

  std::string vary, output = "-";
  auto* sweep = app.add_subcommand("sweep", "tabulate ages along a parameter grid (CSV)");
  sweep->add_option("spec", spec_path, "template network spec JSON file")->required();
  sweep->add_option("--vary", vary, "param=start:stop:step (param: n, lambda, lambda1)")
      ->required();
  sweep->add_option("--method", method,
                    "auto | closed | recursion | structured | dense | simulate")
      ->default_val("auto");
  sweep->add_option("--output", output, "CSV path ('-' for stdout)")->default_val("-");
  add_sim_flags(sweep, sim_flags);

  std::vector<double> weights;
  double lambda_total = 0.0, opt_mu = 1.0, mu1 = 0.0, mu2 = 0.0;
  auto* optimize = app.add_subcommand("optimize", "arrival-rate allocation");
  optimize->add_option("--weights", weights, "per-source weights (weighted two-server mode)");
  optimize->add_option("--lambda-total", lambda_total, "total arrival budget")->required();
  optimize->add_option("--mu", opt_mu, "service rate for the weighted mode")->default_val(1.0);
  optimize->add_option("--mu1", mu1, "server 1 service rate (heterogeneous mode)");
  optimize->add_option("--mu2", mu2, "server 2 service rate (heterogeneous mode)");

  auto* compare = app.add_subcommand("compare", "analytic vs dense oracle vs simulation");
  compare->add_option("spec", spec_path, "network spec JSON file")->required();
  add_sim_flags(compare, sim_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](json rec) {
    if (timing) {
      rec["wall_clock_s"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    std::cout << rec.dump(2) << '\n';
    return 0;
  };

  try {
    if (analytic->parsed()) {
      const NetworkSpec spec = load_spec(spec_path);
      const AnalyticResult r = analytic_ages(spec, method);
      json rec = base_record(spec);
      rec["method"] = r.method;
      rec["aoi"] = r.aoi;
      if (self_check) {
        if (spec.m == 1 && spec.n > 5) {
          rec["self_check"] = json{{"skipped", true}};
        } else {
          const double err = max_rel_err(r.aoi, dense_ages(spec));
          rec["self_check"] = json{{"rel_err", err}, {"ok", err <= 1e-9}};
        }
      }
      return finish(rec);
    }
    if (simulate->parsed()) {
      return finish(sim_record(load_spec(spec_path), sim_flags));
    }
    if (sweep->parsed()) {
      return run_sweep(load_spec(spec_path), parse_grid(vary), method, sim_flags, output);
    }
    if (optimize->parsed()) {
      const bool weighted = !weights.empty();
      const bool hetero = mu1 > 0.0 || mu2 > 0.0;
      if (weighted == hetero) {
        throw Error(ErrorCode::ModeConflict,
                    "pick exactly one mode: --weights or --mu1/--mu2");
      }
      json rec;
      if (weighted) {
        const auto allocation = aoi::homogeneous::split_rates_by_weight(weights, lambda_total);
        const auto ages = aoi::homogeneous::average_age_two_servers(allocation, opt_mu);
        double objective = 0.0;
        for (std::size_t i = 0; i < ages.size(); ++i) objective += weights[i] * ages[i];
        rec = json{{"mode", "weighted_two_server"}, {"weights", weights},
                   {"lambda_total", lambda_total}, {"mu", opt_mu},
                   {"allocation", allocation},     {"aoi", ages},
                   {"weighted_aoi", objective}};
      } else {
        if (!(mu1 > 0.0) || !(mu2 > 0.0)) {
          throw Error(ErrorCode::ModeConflict, "heterogeneous mode needs both --mu1 and --mu2");
        }
        const auto [l1, l2] =
            aoi::heterogeneous::optimal_split_two_servers(lambda_total, mu1, mu2);
        // boundary allocations starve one server; age comes from the oracle limit
        double age;
        if (l1 <= 0.0 || l2 <= 0.0) {
          const double lam = std::max(l1, l2);
          const double mu = l1 > 0.0 ? mu1 : mu2;
          age = 1.0 / lam + 1.0 / mu;
        } else {
          age = aoi::heterogeneous::average_age_two_servers(l1, l2, mu1, mu2);
        }
        rec = json{{"mode", "heterogeneous_two_server"},
                   {"lambda_total", lambda_total},
                   {"mu1", mu1},
                   {"mu2", mu2},
                   {"allocation", {l1, l2}},
                   {"aoi", age}};
      }
      return finish(rec);
    }
    if (compare->parsed()) {
      const NetworkSpec spec = load_spec(spec_path);
      const AnalyticResult analytic_result = analytic_ages(spec, "auto");
      const std::vector<double> dense = dense_ages(spec);
      SimFlags flags = sim_flags;
      flags.discipline = "lcfs";
      const auto out = aoi::sim::simulate(flags.config(spec));
      json rec = base_record(spec);
      rec["analytic_method"] = analytic_result.method;
      rec["analytic"] = analytic_result.aoi;
      rec["dense"] = dense;
      rec["simulation"] = out.mean_aoi;
      rec["sim_ci_halfwidth"] = out.ci_halfwidth;
      rec["rel_err_analytic_vs_dense"] = max_rel_err(analytic_result.aoi, dense);
      rec["rel_err_analytic_vs_sim"] = max_rel_err(analytic_result.aoi, out.mean_aoi);
      return finish(rec);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
