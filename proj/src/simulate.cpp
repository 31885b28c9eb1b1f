#include "tailfuse/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tailfuse/inference.hpp"
#include "tailfuse/math.hpp"
#include "tailfuse/rng.hpp"

namespace tailfuse {

ScenarioConfig ScenarioConfig::blocks(int n, int J, int gamma_block, int sigma_block, double rho,
                                      std::uint64_t seed) {
  if (n <= 0 || J <= 0 || gamma_block <= 0 || sigma_block <= 0)
    throw std::invalid_argument("ScenarioConfig::blocks: sizes must be positive");
  ScenarioConfig c;
  c.n = n;
  c.J = J;
  c.rho = rho;
  c.seed = seed;
  c.gamma_true.resize(static_cast<std::size_t>(J));
  c.sigma_true.resize(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    const int block = (j + gamma_block - 1) / gamma_block;  // ceil(j / B)
    c.gamma_true[static_cast<std::size_t>(j - 1)] = 0.3 - 0.05 * (block - 1);
    const int sub = ((j - 1) % gamma_block) / sigma_block;
    double sigma;
    if (block <= 6)
      sigma = 40.0 - 5.0 * sub;
    else if (block == 7)
      sigma = 40.0;
    else
      sigma = 200.0 + 50.0 * sub;
    c.sigma_true[static_cast<std::size_t>(j - 1)] = sigma;
  }
  return c;
}

double ScenarioConfig::mixed_threshold() const { return normal_quantile(mixed_threshold_prob); }

std::vector<std::vector<int>> ScenarioConfig::true_partition() const {
  std::map<double, std::vector<int>> by_gamma;
  for (int j = 0; j < J; ++j) by_gamma[gamma_true[static_cast<std::size_t>(j)]].push_back(j);
  std::vector<std::vector<int>> parts;
  parts.reserve(by_gamma.size());
  for (auto& [g, members] : by_gamma) parts.push_back(std::move(members));
  return parts;
}

bool ScenarioConfig::valid() const {
  return n > 0 && J > 0 && rho * rho < 1.0 &&
         gamma_true.size() == static_cast<std::size_t>(J) &&
         sigma_true.size() == static_cast<std::size_t>(J) &&
         std::all_of(gamma_true.begin(), gamma_true.end(), [](double g) { return g > -0.5; }) &&
         std::all_of(sigma_true.begin(), sigma_true.end(), [](double s) { return s > 0.0; });
}

Matrix generate(const ScenarioConfig& config, std::uint64_t replication) {
  if (!config.valid()) throw std::invalid_argument("generate: invalid scenario config");
  const int n = config.n, J = config.J;
  const double rho = config.rho;
  const double noise = std::sqrt(1.0 - rho * rho);
  const CounterRng rng(config.seed, replication);
  const bool mixed = config.tail_kind == TailKind::mixed;
  const double p0 = config.mixed_threshold_prob;
  const double w0 = mixed ? config.mixed_threshold() : 0.0;

  Matrix x(static_cast<std::size_t>(n), static_cast<std::size_t>(J));
  for (int i = 0; i < n; ++i) {
    double z = 0.0;
    for (int j = 0; j < J; ++j) {
      const std::uint64_t counter =
          static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(J) +
          static_cast<std::uint64_t>(j);
      const double v = rng.normal_at(counter);
      z = (j == 0) ? v : rho * z + noise * v;
      const double uu = normal_cdf(z);
      const GpdParams marginal{config.gamma_true[static_cast<std::size_t>(j)],
                               config.sigma_true[static_cast<std::size_t>(j)]};
      double value;
      if (!mixed) {
        value = gpd_quantile(uu, marginal);
      } else if (uu < p0) {
        value = z;  // Phi^{-1}(Phi(z))
      } else {
        value = w0 + gpd_quantile((uu - p0) / (1.0 - p0), marginal);
      }
      x(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = value;
    }
  }
  return x;
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::vector<double> err_sq_method, err_sq_baseline;
  std::vector<int> cover_method, cover_baseline;
  std::vector<double> len_ratio;
};

struct FitSummary {
  std::vector<GpdParams> params;
  std::vector<std::int64_t> n_group;  // n_A per cluster
};

FitSummary run_procedure(const ProcedureSpec& proc, const ExceedanceData& data,
                         const std::vector<ClusterFit>& clusterwise, const ScenarioConfig& config,
                         const FitOptions& fit_opts) {
  const std::size_t J = data.num_clusters();
  FitSummary out;
  out.params.resize(J);
  out.n_group.resize(J);

  switch (proc.kind) {
    case ProcedureSpec::Kind::clusterwise: {
      for (std::size_t j = 0; j < J; ++j) {
        out.params[j] = clusterwise[j].params;
        out.n_group[j] = static_cast<std::int64_t>(data.clusters[j].effective_count());
      }
      return out;
    }
    case ProcedureSpec::Kind::oracle_grouped: {
      const auto partition = config.true_partition();
      const GroupedFit fit = fit_grouped(data, partition, fit_opts);
      out.params = fit.params;
      for (const auto& group : partition) {
        std::int64_t total = 0;
        for (int j : group) total += static_cast<std::int64_t>(data.clusters[j].effective_count());
        for (int j : group) out.n_group[static_cast<std::size_t>(j)] = total;
      }
      return out;
    }
    case ProcedureSpec::Kind::fused: {
      std::vector<double> gamma_tilde(J);
      std::vector<GpdParams> init(J);
      for (std::size_t j = 0; j < J; ++j) {
        gamma_tilde[j] = clusterwise[j].params.gamma;
        init[j] = clusterwise[j].params;
      }
      const ClusterGraph g = build_graph_band(static_cast<int>(J), proc.band_offsets);
      PathOptions popts;
      popts.admm = proc.admm;
      popts.admm.fit = fit_opts;
      if (proc.weights.kind != WeightKind::uniform)
        popts.reweight = ReweightRule{proc.weights, gamma_tilde, proc.tie_weight_lambda};
      const std::vector<double> grid = default_lambda_grid(data, g, init, popts, proc.grid);
      const PathResult path = solve_path(data, g, grid, init, popts);
      const FusedFit& sel = path.selected();
      out.params = sel.params;
      for (const auto& group : sel.groups) {
        std::int64_t total = 0;
        for (int j : group) total += static_cast<std::int64_t>(data.clusters[j].effective_count());
        for (int j : group) out.n_group[static_cast<std::size_t>(j)] = total;
      }
      return out;
    }
  }
  throw std::logic_error("run_procedure: unknown kind");
}

}  // namespace

EvalReport evaluate(int replications, const ScenarioConfig& config, const ProcedureSpec& method,
                    const ProcedureSpec& baseline, const EvalOptions& opts) {
  if (replications < 2) throw std::invalid_argument("evaluate: need at least 2 replications");
  if (!config.valid()) throw std::invalid_argument("evaluate: invalid scenario config");
  const std::size_t J = static_cast<std::size_t>(config.J);
  const double tau = opts.tau > 0.0 ? opts.tau : 1.0 / (2.0 * config.n);
  const bool mixed = config.tail_kind == TailKind::mixed;
  const double w0 = mixed ? config.mixed_threshold() : 0.0;
  const double xi_true = mixed ? 1.0 - config.mixed_threshold_prob : 1.0;

  std::vector<double> rl_true(J);
  for (std::size_t j = 0; j < J; ++j)
    rl_true[j] = return_level(config.gamma_true[j], config.sigma_true[j], tau, xi_true, w0);

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(replications));
  parallel_for(
      static_cast<std::size_t>(replications),
      [&](std::size_t rep) {
        RepOutcome& out = outcomes[rep];
        try {
          const Matrix x = generate(config, rep);
          const std::vector<double> thresholds(J, w0);
          const ExceedanceData data = ExceedanceData::from_matrix(x, thresholds);
          const std::vector<ClusterFit> cw = fit_clusterwise(data, opts.fit);

          const FitSummary fit_b = run_procedure(baseline, data, cw, config, opts.fit);
          const FitSummary fit_m = run_procedure(method, data, cw, config, opts.fit);

          out.err_sq_method.resize(J);
          out.err_sq_baseline.resize(J);
          out.cover_method.resize(J);
          out.cover_baseline.resize(J);
          out.len_ratio.resize(J);
          for (std::size_t j = 0; j < J; ++j) {
            const double em = fit_m.params[j].gamma - config.gamma_true[j];
            const double eb = fit_b.params[j].gamma - config.gamma_true[j];
            out.err_sq_method[j] = em * em;
            out.err_sq_baseline[j] = eb * eb;

            const auto& cl = data.clusters[j];
            auto ci = [&](const FitSummary& fs) {
              RlContext ctx;
              ctx.gamma_hat = fs.params[j].gamma;
              ctx.sigma_hat = fs.params[j].sigma;
              ctx.xi_hat = cl.exceed_prob_hat();
              ctx.threshold = cl.threshold;
              ctx.n_group = fs.n_group[j];
              ctx.n_cluster = static_cast<std::int64_t>(cl.effective_count());
              ctx.n_raw = cl.raw_count;
              return return_level_ci(ctx, tau, opts.coverage_p);
            };
            const ReturnLevelEstimate rm = ci(fit_m);
            const ReturnLevelEstimate rb = ci(fit_b);
            out.cover_method[j] = rm.ci_lower <= rl_true[j] && rl_true[j] <= rm.ci_upper;
            out.cover_baseline[j] = rb.ci_lower <= rl_true[j] && rl_true[j] <= rb.ci_upper;
            const double lb = rb.ci_upper - rb.ci_lower;
            out.len_ratio[j] = lb > 0.0 ? (rm.ci_upper - rm.ci_lower) / lb : 1.0;
          }
          out.ok = true;
        } catch (const std::exception&) {
          out.ok = false;
        }
      },
      opts.threads);

  EvalReport report;
  report.clusters.resize(J);
  int used = 0;
  std::vector<double> mse_m(J, 0.0), mse_b(J, 0.0), cov_m(J, 0.0), cov_b(J, 0.0), len(J, 0.0);
  for (const RepOutcome& out : outcomes) {
    if (!out.ok) {
      ++report.failed;
      continue;
    }
    ++used;
    for (std::size_t j = 0; j < J; ++j) {
      mse_m[j] += out.err_sq_method[j];
      mse_b[j] += out.err_sq_baseline[j];
      cov_m[j] += out.cover_method[j];
      cov_b[j] += out.cover_baseline[j];
      len[j] += out.len_ratio[j];
    }
  }
  if (used == 0) throw std::runtime_error("evaluate: every replication failed");
  report.replications = used;
  for (std::size_t j = 0; j < J; ++j) {
    ClusterMetrics& m = report.clusters[j];
    m.gamma_true = config.gamma_true[j];
    m.mse_ratio = mse_b[j] > 0.0 ? mse_m[j] / mse_b[j] : 1.0;
    m.coverage_method = cov_m[j] / used;
    m.coverage_baseline = cov_b[j] / used;
    m.ci_length_ratio = len[j] / used;
  }
  return report;
}

}  // namespace tailfuse
