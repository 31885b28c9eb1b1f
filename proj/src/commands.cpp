#include "tailfuse/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tailfuse/admm.hpp"
#include "tailfuse/csv.hpp"
#include "tailfuse/inference.hpp"
#include "tailfuse/simulate.hpp"
#include "tailfuse/tail_dep.hpp"
#include "tailfuse/threshold.hpp"

namespace tailfuse {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::set(const std::string& key, const std::string& value) { entries_[key] = value; }

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key at line " +
                                                 std::to_string(line_no));
    entries_[key] = value;
  }
}

bool RunConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string RunConfig::str(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double RunConfig::num(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t used = 0;
  const double v = std::stod(it->second, &used);
  if (used != it->second.size())
    throw std::invalid_argument("config: " + key + " is not a number: " + it->second);
  return v;
}

long RunConfig::integer(const std::string& key, long fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t used = 0;
  const long v = std::stol(it->second, &used);
  if (used != it->second.size())
    throw std::invalid_argument("config: " + key + " is not an integer: " + it->second);
  return v;
}

std::vector<double> RunConfig::num_list(const std::string& key) const {
  std::vector<double> out;
  std::istringstream ss(str(key));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(std::stod(cell));
  }
  return out;
}

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  for (double v : num_list(key)) out.push_back(static_cast<int>(std::lround(v)));
  return out;
}

namespace {

struct CommandError : std::runtime_error {
  int code;
  CommandError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

fs::path out_dir(const RunConfig& config) {
  const std::string dir = config.str("out_dir", "out");
  fs::create_directories(dir);
  return dir;
}

Matrix load_input(const RunConfig& config) {
  const std::string path = config.str("input");
  if (path.empty()) throw CommandError(kExitInputError, "input: no input file given");
  try {
    return read_csv_file(path).values;
  } catch (const std::exception& e) {
    throw CommandError(kExitInputError, std::string("input: ") + e.what());
  }
}

unsigned thread_count(const RunConfig& config) {
  return static_cast<unsigned>(config.integer("threads", 0));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// ---- fit pipeline pieces ----

std::vector<double> resolve_thresholds(const RunConfig& config, const Matrix& raw,
                                       int* selected_k) {
  const std::string mode = config.str("threshold.mode", "common-k");
  if (mode == "fixed") {
    const std::string file = config.str("threshold.file");
    if (file.empty())
      throw CommandError(kExitInputError, "input: threshold.mode=fixed needs threshold.file");
    const Matrix t = read_csv_file(file).values;
    std::vector<double> thresholds;
    if (t.rows() == 1) {
      for (std::size_t j = 0; j < t.cols(); ++j) thresholds.push_back(t(0, j));
    } else if (t.cols() == 1) {
      for (std::size_t i = 0; i < t.rows(); ++i) thresholds.push_back(t(i, 0));
    } else {
      throw CommandError(kExitInputError, "input: threshold file must be one row or one column");
    }
    if (thresholds.size() != raw.cols())
      throw CommandError(kExitInputError, "input: one threshold per cluster required");
    return thresholds;
  }
  if (mode == "common-k") {
    const long k = config.integer("threshold.k", -1);
    if (k <= 0) throw CommandError(kExitInputError, "input: threshold.mode=common-k needs threshold.k");
    if (selected_k) *selected_k = static_cast<int>(k);
    return equal_count_thresholds(raw, static_cast<int>(k));
  }
  if (mode == "auto") {
    const long k_min = config.integer("threshold.k-min", 20);
    const long k_max = config.integer("threshold.k-max",
                                      static_cast<long>(raw.rows()) / 2);
    const long k_step = config.integer("threshold.k-step", std::max(1L, (k_max - k_min) / 40));
    std::vector<int> ks;
    for (long k = k_min; k <= k_max; k += k_step) ks.push_back(static_cast<int>(k));
    const RiskPath path = risk_path(raw, ks);
    const std::string method = config.str("threshold.method", "stability");
    SelectedK sel;
    if (method == "min")
      sel = select_k(path, SelectKMethod::min);
    else if (method == "stability")
      sel = select_k(path, SelectKMethod::stability);
    else
      throw CommandError(kExitInputError, "input: unknown threshold.method " + method);
    if (selected_k) *selected_k = sel.k;
    return equal_count_thresholds(raw, sel.k);
  }
  throw CommandError(kExitInputError, "input: unknown threshold.mode " + mode);
}

WeightSpec resolve_weight_spec(const RunConfig& config, bool* tie_lambda) {
  const std::string kind = config.str("weights.kind", "scad");
  *tie_lambda = config.str("weights.lambda", "tie") == "tie";
  const double lambda = *tie_lambda ? 1.0 : config.num("weights.lambda", 1.0);
  if (kind == "uniform") return WeightSpec::uniform();
  if (kind == "adaptive") return WeightSpec::adaptive();
  if (kind == "scad") return WeightSpec::scad(lambda, config.num("weights.a", 3.7));
  if (kind == "mcp") return WeightSpec::mcp(lambda, config.num("weights.a", 3.0));
  throw CommandError(kExitInputError, "input: unknown weights.kind " + kind);
}

ClusterGraph resolve_graph(const RunConfig& config, const Matrix& raw,
                           std::span<const double> gamma_tilde, const fs::path& dir) {
  const std::string mode = config.str("graph.mode", "band");
  const int J = static_cast<int>(raw.cols());
  if (mode == "band") {
    std::vector<int> offsets = config.has("graph.offsets") ? config.int_list("graph.offsets")
                                                           : std::vector<int>{1, 2, 3, 4};
    const bool common = config.integer("graph.band-common-range", 0) != 0;
    return build_graph_band(J, offsets, common);
  }
  if (mode == "chi") {
    const double u = config.num("graph.chi-u", 0.98);
    const double cutoff = config.num("graph.cutoff", 0.76);
    const fs::path cache = dir / "chi.csv";
    Matrix chi;
    if (fs::exists(cache)) {
      chi = read_csv_file(cache.string()).values;
      if (chi.rows() != raw.cols() || chi.cols() != raw.cols())
        throw CommandError(kExitInputError, "input: cached chi.csv has the wrong shape");
    } else {
      chi = chi_matrix(raw, u, thread_count(config));
      write_csv_file(cache.string(), chi);
    }
    return build_graph_chi(chi, cutoff);
  }
  if (mode == "homogeneity") {
    if (config.has("graph.budget"))
      return build_graph_homogeneity_budget(gamma_tilde, config.integer("graph.budget", 0));
    if (!config.has("graph.delta"))
      throw CommandError(kExitInputError,
                         "input: graph.mode=homogeneity needs graph.delta or graph.budget");
    return build_graph_homogeneity(gamma_tilde, config.num("graph.delta", 0.0));
  }
  if (mode == "file") {
    const std::string file = config.str("graph.file");
    if (file.empty()) throw CommandError(kExitInputError, "input: graph.mode=file needs graph.file");
    std::ifstream in(file);
    if (!in) throw CommandError(kExitInputError, "input: cannot open " + file);
    return load_edge_list(in, J);
  }
  throw CommandError(kExitInputError, "input: unknown graph.mode " + mode);
}

json fit_to_json(const FusedFit& fit) {
  json groups = json::array();
  for (const auto& g : fit.groups) {
    json members = json::array();
    for (int j : g) members.push_back(j + 1);
    groups.push_back(members);
  }
  json gamma = json::array(), sigma = json::array(), u = json::array();
  for (const auto& p : fit.params) {
    gamma.push_back(p.gamma);
    sigma.push_back(p.sigma);
  }
  for (double um : fit.u) u.push_back(um);
  return json{{"lambda", fit.lambda},
              {"num_groups", fit.num_groups},
              {"neg_loglik", fit.neg_loglik_value},
              {"converged", fit.converged},
              {"iterations", fit.iterations},
              {"gamma", gamma},
              {"sigma", sigma},
              {"u", u},
              {"groups", groups}};
}

std::vector<std::int64_t> group_totals(const FusedFit& fit, const ExceedanceData& data) {
  std::vector<std::int64_t> n_group(data.num_clusters(), 0);
  for (const auto& group : fit.groups) {
    std::int64_t total = 0;
    for (int j : group) total += static_cast<std::int64_t>(data.clusters[j].effective_count());
    for (int j : group) n_group[static_cast<std::size_t>(j)] = total;
  }
  return n_group;
}

void write_report(const fs::path& path, std::span<const double> taus,
                  const std::vector<GpdParams>& params, const ExceedanceData& data,
                  std::span<const std::int64_t> n_group, std::span<const std::int64_t> group_size,
                  double coverage_p) {
  Matrix rows(taus.size() * data.num_clusters(), 7);
  std::size_t r = 0;
  for (double tau : taus) {
    for (std::size_t j = 0; j < data.num_clusters(); ++j, ++r) {
      const auto& c = data.clusters[j];
      RlContext ctx{params[j].gamma, params[j].sigma, c.exceed_prob_hat(), c.threshold,
                    n_group[j], static_cast<std::int64_t>(c.effective_count()), c.raw_count};
      const ReturnLevelEstimate est = return_level_ci(ctx, tau, coverage_p);
      rows(r, 0) = tau;
      rows(r, 1) = static_cast<double>(j + 1);
      rows(r, 2) = params[j].gamma;
      rows(r, 3) = est.point;
      rows(r, 4) = est.ci_lower;
      rows(r, 5) = est.ci_upper;
      rows(r, 6) = static_cast<double>(group_size[j]);
    }
  }
  write_csv_file(path.string(), rows,
                 {"tau", "cluster", "gamma_hat", "return_level", "ci_lower", "ci_upper",
                  "group_size"});
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const CommandError& e) {
    err << "error: " << e.what() << '\n';
    return e.code;
  } catch (const std::invalid_argument& e) {
    err << "error: input: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace

int cmd_fit(const RunConfig& config, std::ostream& err) {
  return run_guarded(
      [&]() -> int {
        const Matrix raw = load_input(config);
        const fs::path dir = out_dir(config);
        const std::size_t J = raw.cols();

        int selected_k = 0;
        const std::vector<double> thresholds = resolve_thresholds(config, raw, &selected_k);
        const ExceedanceData data = ExceedanceData::from_matrix(raw, thresholds);

        const std::vector<ClusterFit> cw = fit_clusterwise(data);
        std::vector<double> gamma_tilde(J);
        std::vector<GpdParams> init(J);
        for (std::size_t j = 0; j < J; ++j) {
          gamma_tilde[j] = cw[j].params.gamma;
          init[j] = cw[j].params;
        }

        ClusterGraph g = resolve_graph(config, raw, gamma_tilde, dir);
        bool tie_lambda = true;
        const WeightSpec wspec = resolve_weight_spec(config, &tie_lambda);
        PathOptions popts;
        if (wspec.kind == WeightKind::scad_deriv || wspec.kind == WeightKind::mcp_deriv) {
          popts.reweight = ReweightRule{wspec, gamma_tilde, tie_lambda};
        } else {
          g.weights = edge_weights(wspec, g, gamma_tilde);
        }

        std::vector<double> grid;
        if (config.str("lambda.grid", "auto") == "auto") {
          GridOptions gopts;
          gopts.size = static_cast<int>(config.integer("lambda.count", 50));
          gopts.min_ratio = config.num("lambda.min-ratio", 1e-4);
          grid = default_lambda_grid(data, g, init, popts, gopts);
        } else {
          grid = config.num_list("lambda.grid");
          std::sort(grid.begin(), grid.end());
        }

        const PathResult path = solve_path(data, g, grid, init, popts);
        const FusedFit& sel = path.selected();

        {
          std::ofstream gf(dir / "graph.txt");
          save_edge_list(gf, g);
        }

        Matrix clusters(J, 7);
        const std::vector<int> group_of = [&] {
          std::vector<int> ids(J, 0);
          for (std::size_t k = 0; k < sel.groups.size(); ++k)
            for (int j : sel.groups[k]) ids[static_cast<std::size_t>(j)] = static_cast<int>(k) + 1;
          return ids;
        }();
        for (std::size_t j = 0; j < J; ++j) {
          clusters(j, 0) = static_cast<double>(j + 1);
          clusters(j, 1) = static_cast<double>(data.clusters[j].effective_count());
          clusters(j, 2) = thresholds[j];
          clusters(j, 3) = gamma_tilde[j];
          clusters(j, 4) = sel.params[j].gamma;
          clusters(j, 5) = static_cast<double>(group_of[j]);
          clusters(j, 6) = sel.params[j].sigma;
        }
        write_csv_file((dir / "clusters.csv").string(), clusters,
                       {"cluster", "n_j", "w_j", "gamma_tilde", "gamma_hat", "group",
                        "sigma_hat"});

        Matrix path_table(path.grid.size(), 4);
        for (std::size_t i = 0; i < path.grid.size(); ++i) {
          path_table(i, 0) = path.grid[i];
          path_table(i, 1) = static_cast<double>(path.fits[i].num_groups);
          path_table(i, 2) = path.bic_values[i];
          path_table(i, 3) = path.fits[i].converged ? 1.0 : 0.0;
        }
        write_csv_file((dir / "path.csv").string(), path_table,
                       {"lambda", "K", "bic", "converged"});

        json out;
        out["grid"] = path.grid;
        out["selected_index"] = path.selected_index;
        out["bic"] = path.bic_values;
        out["fits"] = json::array();
        for (const auto& fit : path.fits) out["fits"].push_back(fit_to_json(fit));
        write_text(dir / "path_result.json", out.dump(2) + "\n");

        std::vector<double> taus = config.num_list("rl.tau");
        if (taus.empty()) taus = {1.0 / (2.0 * static_cast<double>(raw.rows()))};
        const double coverage_p = 1.0 - config.num("rl.level", 0.95);
        const auto n_group = group_totals(sel, data);
        std::vector<std::int64_t> group_size(J);
        for (const auto& group : sel.groups)
          for (int j : group) group_size[static_cast<std::size_t>(j)] =
              static_cast<std::int64_t>(group.size());
        write_report(dir / "report.csv", taus, sel.params, data, n_group, group_size, coverage_p);

        json meta;
        meta["raw_n"] = raw.rows();
        meta["num_clusters"] = J;
        meta["selected_lambda"] = sel.lambda;
        meta["selected_K"] = sel.num_groups;
        meta["selected_bic"] = path.bic_values[static_cast<std::size_t>(path.selected_index)];
        meta["threshold_k"] = selected_k;
        write_text(dir / "meta.json", meta.dump(2) + "\n");

        if (!sel.converged) {
          err << "error: convergence: selected fit did not converge\n";
          return kExitNoConvergence;
        }
        return kExitOk;
      },
      err);
}

int cmd_simulate(const RunConfig& config, std::ostream& err) {
  return run_guarded(
      [&]() -> int {
        const fs::path dir = out_dir(config);
        const std::string preset = config.str("sim.preset", "");
        ScenarioConfig scenario;
        if (preset == "s5-small") {
          scenario = ScenarioConfig::blocks(120, 110, 10, 2);
        } else if (preset == "s5-full") {
          scenario = ScenarioConfig::blocks(120, 1100, 100, 20);
        } else if (preset.empty()) {
          scenario = ScenarioConfig::blocks(
              static_cast<int>(config.integer("sim.n", 120)),
              static_cast<int>(config.integer("sim.J", 110)),
              static_cast<int>(config.integer("sim.gamma-block", 10)),
              static_cast<int>(config.integer("sim.sigma-block", 2)));
        } else {
          throw CommandError(kExitInputError, "input: unknown sim.preset " + preset);
        }
        scenario.n = static_cast<int>(config.integer("sim.n", scenario.n));
        scenario.rho = config.num("sim.rho", scenario.rho);
        scenario.seed = static_cast<std::uint64_t>(config.integer("seed", 0));
        if (config.str("sim.tail", "gpd") == "mixed") scenario.tail_kind = TailKind::mixed;

        const Matrix data = generate(scenario, 0);
        write_csv_file((dir / "data.csv").string(), data);

        Matrix truth(static_cast<std::size_t>(scenario.J), 3);
        for (int j = 0; j < scenario.J; ++j) {
          truth(static_cast<std::size_t>(j), 0) = j + 1;
          truth(static_cast<std::size_t>(j), 1) = scenario.gamma_true[static_cast<std::size_t>(j)];
          truth(static_cast<std::size_t>(j), 2) = scenario.sigma_true[static_cast<std::size_t>(j)];
        }
        write_csv_file((dir / "truth.csv").string(), truth, {"cluster", "gamma", "sigma"});

        const int reps = static_cast<int>(config.integer("sim.reps", 0));
        if (reps >= 2) {
          const std::string proc = config.str("sim.procedure", "fused");
          ProcedureSpec method;
          if (proc == "fused") {
            method = ProcedureSpec::fused();
            method.band_offsets = config.has("graph.offsets") ? config.int_list("graph.offsets")
                                                              : std::vector<int>{1, 2, 3, 4};
            method.grid.size = static_cast<int>(config.integer("lambda.count", 50));
          } else if (proc == "oracle") {
            method = ProcedureSpec::oracle_grouped();
          } else if (proc == "clusterwise") {
            method = ProcedureSpec::clusterwise();
          } else {
            throw CommandError(kExitInputError, "input: unknown sim.procedure " + proc);
          }
          EvalOptions eopts;
          eopts.threads = thread_count(config);
          eopts.tau = config.num("rl.tau", -1.0);
          const EvalReport report = evaluate(reps, scenario, method,
                                             ProcedureSpec::clusterwise(), eopts);
          Matrix table(report.clusters.size(), 6);
          for (std::size_t j = 0; j < report.clusters.size(); ++j) {
            const auto& m = report.clusters[j];
            table(j, 0) = static_cast<double>(j + 1);
            table(j, 1) = m.gamma_true;
            table(j, 2) = m.mse_ratio;
            table(j, 3) = m.coverage_method;
            table(j, 4) = m.coverage_baseline;
            table(j, 5) = m.ci_length_ratio;
          }
          write_csv_file((dir / "eval.csv").string(), table,
                         {"cluster", "gamma_true", "mse_ratio", "coverage",
                          "coverage_clusterwise", "ci_length_ratio"});
          json meta;
          meta["replications"] = report.replications;
          meta["failed"] = report.failed;
          meta["seed"] = scenario.seed;
          write_text(dir / "meta.json", meta.dump(2) + "\n");
        }
        return kExitOk;
      },
      err);
}

int cmd_threshold(const RunConfig& config, std::ostream& err) {
  return run_guarded(
      [&]() -> int {
        const Matrix raw = load_input(config);
        const fs::path dir = out_dir(config);
        const long k_min = config.integer("threshold.k-min", 20);
        const long k_max = config.integer("threshold.k-max", static_cast<long>(raw.rows()) / 2);
        const long k_step = config.integer("threshold.k-step", std::max(1L, (k_max - k_min) / 40));
        if (k_min < 10 || k_max < k_min)
          throw CommandError(kExitInputError, "input: bad k grid");
        std::vector<int> ks;
        for (long k = k_min; k <= k_max; k += k_step) ks.push_back(static_cast<int>(k));
        const RiskPath path = risk_path(raw, ks);

        Matrix table(path.ks.size(), 2);
        for (std::size_t i = 0; i < path.ks.size(); ++i) {
          table(i, 0) = path.ks[i];
          table(i, 1) = path.risks[i];
        }
        write_csv_file((dir / "risk.csv").string(), table, {"k", "risk"});

        const std::string method = config.str("threshold.method", "stability");
        SelectedK sel;
        if (method == "manual")
          sel = select_k(path, SelectKMethod::manual,
                         static_cast<int>(config.integer("threshold.k", 0)));
        else if (method == "min")
          sel = select_k(path, SelectKMethod::min);
        else
          sel = select_k(path, SelectKMethod::stability);
        if (sel.fell_back) err << "warning: no stable point found; using the risk minimizer\n";

        json meta;
        meta["selected_k"] = sel.k;
        meta["fell_back"] = sel.fell_back;
        write_text(dir / "meta.json", meta.dump(2) + "\n");

        if (config.has("threshold.mrl-clusters")) {
          std::vector<double> rows;
          std::vector<double> grid;
          for (const int j : config.int_list("threshold.mrl-clusters")) {
            if (j < 1 || static_cast<std::size_t>(j) > raw.cols())
              throw CommandError(kExitInputError, "input: mrl cluster out of range");
            std::vector<double> col(raw.col(static_cast<std::size_t>(j - 1)).begin(),
                                    raw.col(static_cast<std::size_t>(j - 1)).end());
            std::vector<double> sorted = col;
            std::sort(sorted.begin(), sorted.end());
            grid.clear();
            for (double q = 0.5; q < 0.995; q += 0.02)
              grid.push_back(sorted[static_cast<std::size_t>(q * (sorted.size() - 1))]);
            for (const MrlPoint& pt : mean_residual_life(col, grid)) {
              rows.insert(rows.end(), {static_cast<double>(j), pt.threshold, pt.mean_excess,
                                       pt.ci_lower, pt.ci_upper, static_cast<double>(pt.count)});
            }
          }
          Matrix mrl(rows.size() / 6, 6);
          for (std::size_t i = 0; i < mrl.rows(); ++i)
            for (std::size_t c = 0; c < 6; ++c) mrl(i, c) = rows[i * 6 + c];
          write_csv_file((dir / "mrl.csv").string(), mrl,
                         {"cluster", "threshold", "mean_excess", "ci_lower", "ci_upper",
                          "count"});
        }
        return kExitOk;
      },
      err);
}

int cmd_graph(const RunConfig& config, std::ostream& err) {
  return run_guarded(
      [&]() -> int {
        const Matrix raw = load_input(config);
        const fs::path dir = out_dir(config);
        std::vector<double> gamma_tilde;
        if (config.str("graph.mode", "band") == "homogeneity") {
          // homogeneity needs cluster-wise shape estimates first
          int selected_k = 0;
          const auto thresholds = resolve_thresholds(config, raw, &selected_k);
          const auto data = ExceedanceData::from_matrix(raw, thresholds);
          for (const auto& f : fit_clusterwise(data)) gamma_tilde.push_back(f.params.gamma);
        }
        const ClusterGraph g = resolve_graph(config, raw, gamma_tilde, dir);
        std::ofstream gf(dir / "graph.txt");
        save_edge_list(gf, g);
        json meta;
        meta["num_vertices"] = g.num_vertices;
        meta["num_edges"] = g.num_edges();
        meta["components"] = connected_components(g).size();
        write_text(dir / "meta.json", meta.dump(2) + "\n");
        return kExitOk;
      },
      err);
}

int cmd_return_level(const RunConfig& config, std::ostream& err) {
  return run_guarded(
      [&]() -> int {
        const std::string path = config.str("input");
        if (path.empty())
          throw CommandError(kExitInputError, "input: no cluster table given");
        const CsvTable table = read_csv_file(path);
        const std::vector<std::string> expect = {"cluster",   "n_j",   "w_j", "gamma_tilde",
                                                 "gamma_hat", "group", "sigma_hat"};
        if (table.header != expect)
          throw CommandError(kExitInputError, "input: expected a clusters.csv table");
        const fs::path dir = out_dir(config);

        long raw_n = config.integer("rl.raw-n", -1);
        if (raw_n <= 0) {
          const fs::path meta_path = fs::path(path).parent_path() / "meta.json";
          if (fs::exists(meta_path)) {
            std::ifstream in(meta_path);
            json meta = json::parse(in);
            if (meta.contains("raw_n")) raw_n = meta["raw_n"].get<long>();
          }
        }
        if (raw_n <= 0)
          throw CommandError(kExitInputError, "input: rl.raw-n not given and no meta.json found");

        const Matrix& t = table.values;
        const std::size_t J = t.rows();
        ExceedanceData data;
        data.clusters.resize(J);
        std::vector<GpdParams> params(J);
        std::vector<std::int64_t> n_group(J, 0), group_size(J, 0);
        std::map<long, std::int64_t> group_n;
        std::map<long, std::int64_t> group_members;
        for (std::size_t j = 0; j < J; ++j) {
          const long group = std::lround(t(j, 5));
          group_n[group] += std::lround(t(j, 1));
          group_members[group] += 1;
        }
        for (std::size_t j = 0; j < J; ++j) {
          const long nj = std::lround(t(j, 1));
          data.clusters[j].threshold = t(j, 2);
          data.clusters[j].raw_count = raw_n;
          data.clusters[j].exceedances.assign(static_cast<std::size_t>(nj), 1.0);  // counts only
          params[j] = {t(j, 4), t(j, 6)};
          const long group = std::lround(t(j, 5));
          n_group[j] = group_n[group];
          group_size[j] = group_members[group];
        }
        std::vector<double> taus = config.num_list("rl.tau");
        if (taus.empty())
          throw CommandError(kExitInputError, "input: rl.tau required for return-level");
        const double coverage_p = 1.0 - config.num("rl.level", 0.95);
        write_report(dir / "report.csv", taus, params, data, n_group, group_size, coverage_p);
        return kExitOk;
      },
      err);
}

}  // namespace tailfuse
