#pragma once

// Finite-difference parametric sensitivity estimation over coupled pairs.
//
// The estimator is the forward difference
//   D_N = (1 / (N delta)) sum_i [ f(X_i^{theta+eps}(t)) - f(X_i^theta(t)) ],
// whose variance is controlled by the coupling used to build each pair.  The
// scan fits the log-log slope of Var(f difference) against |eps|_1 together
// with the slopes of the coupled gap moments E|X^{theta+eps}(t)-X^theta(t)|_1^r.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coupled_crn/couplings.hpp"
#include "coupled_crn/ensemble.hpp"
#include "coupled_crn/network.hpp"
#include "coupled_crn/stats.hpp"

namespace ccrn {

// Scalar output f(x) evaluated on terminal states.
struct Observable {
  enum class Kind { species_count, total_count, linear };

  Kind kind = Kind::total_count;
  std::vector<double> weights;  // materialized to length d
  int species = -1;

  static Observable species_count(const ReactionNetwork& network, int index) {
    if (index < 0 || index >= network.species_count) {
      throw UsageError("observable species index out of range");
    }
    Observable f;
    f.kind = Kind::species_count;
    f.species = index;
    f.weights.assign(static_cast<std::size_t>(network.species_count), 0.0);
    f.weights[static_cast<std::size_t>(index)] = 1.0;
    return f;
  }

  static Observable total_count(const ReactionNetwork& network) {
    Observable f;
    f.kind = Kind::total_count;
    f.weights.assign(static_cast<std::size_t>(network.species_count), 1.0);
    return f;
  }

  static Observable linear(const ReactionNetwork& network, std::vector<double> w) {
    if (w.size() != static_cast<std::size_t>(network.species_count)) {
      throw UsageError("observable weight vector has wrong dimension");
    }
    Observable f;
    f.kind = Kind::linear;
    f.weights = std::move(w);
    return f;
  }

  double eval(std::span<const std::int64_t> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      s += weights[i] * static_cast<double>(x[i]);
    }
    return s;
  }
};

// One perturbed coordinate: theta[param_index] += delta.
struct FdStep {
  int param_index = 0;
  double delta = 0.0;

  PerturbVec as_vector(const ReactionNetwork& network) const {
    if (param_index < 0 || param_index >= network.param_count) {
      throw UsageError("perturbed parameter index out of range");
    }
    if (delta == 0.0) throw UsageError("finite-difference step must be nonzero");
    PerturbVec eps(static_cast<std::size_t>(network.param_count), 0.0);
    eps[static_cast<std::size_t>(param_index)] = delta;
    return eps;
  }
};

struct EstimateReport {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t master_seed = 0;
  CouplingMethod method = CouplingMethod::stacked;
  PerturbVec epsilon;
};

struct VarianceDecomposition {
  double var_difference = 0.0;
  double var_perturbed = 0.0;
  double var_nominal = 0.0;
  double covariance = 0.0;
  // Standard errors of the three variance estimates.
  double se_var_difference = 0.0;
  double se_var_perturbed = 0.0;
  double se_var_nominal = 0.0;
  std::uint64_t n_paths = 0;
};

struct ScanRow {
  double eps_l1 = 0.0;
  double var_difference = 0.0;
  double ci_half_width = 0.0;  // 3 standard errors of the variance estimate
  std::vector<double> moments;     // E|dX|_1^r per requested r
  std::vector<double> moment_ses;  // standard errors, same order
};

struct ScanReport {
  CouplingMethod method = CouplingMethod::stacked;
  std::vector<int> moment_orders;
  std::vector<ScanRow> rows;        // in the given (decreasing) eps order
  LinearFit variance_slope;         // log Var vs log |eps|_1
  std::vector<LinearFit> moment_slopes;  // per requested r
};

namespace detail {

inline void check_box(const ReactionNetwork& network, const ParamPoint& theta,
                      std::span<const double> eps,
                      const std::optional<ParamBox>& box) {
  check_theta(network, theta);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (!(theta[j] + eps[j] > 0.0)) {
      throw UsageError("theta + eps leaves the positive orthant");
    }
  }
  if (box) {
    if (!box->contains(theta)) throw UsageError("theta lies outside the parameter box");
    ParamPoint shifted(theta.begin(), theta.end());
    for (std::size_t j = 0; j < theta.size(); ++j) shifted[j] += eps[j];
    if (!box->contains(shifted)) {
      throw UsageError("theta + eps leaves the parameter box");
    }
  }
}

// Runs n_paths coupled pairs and stores f(perturbed leg), f(nominal leg) and
// |dX|_1 at the horizon, indexed by path.
struct PairedSamples {
  std::vector<double> f_perturbed;
  std::vector<double> f_nominal;
  std::vector<double> gap_l1;
};

inline PairedSamples run_pairs(const ReactionNetwork& network,
                               const ParamPoint& theta, std::span<const double> eps,
                               std::span<const std::int64_t> x0,
                               const Observable& f, double t,
                               std::uint64_t n_paths, CouplingMethod method,
                               std::uint64_t master_seed, std::uint64_t path_offset,
                               unsigned workers) {
  SimConfig config;
  config.t_end = t;
  config.record_events = false;

  PairedSamples out;
  out.f_perturbed.resize(n_paths);
  out.f_nominal.resize(n_paths);
  out.gap_l1.resize(n_paths);
  parallel_paths(n_paths, workers, [&](std::uint64_t path) {
    const CoupledTrajectory pair =
        couple(network, theta, eps, x0, config,
               SeedSpec{master_seed, path_offset + path}, method);
    out.f_perturbed[path] = f.eval(pair.perturbed.final_state);
    out.f_nominal[path] = f.eval(pair.nominal.final_state);
    std::int64_t gap = 0;
    for (std::size_t i = 0; i < pair.perturbed.final_state.size(); ++i) {
      gap += std::llabs(pair.perturbed.final_state[i] - pair.nominal.final_state[i]);
    }
    out.gap_l1[path] = static_cast<double>(gap);
  });
  return out;
}

}  // namespace detail

// Forward-difference estimate of d/dtheta_j E[f(X(t))].
inline EstimateReport fd_estimate(const ReactionNetwork& network,
                                  const ParamPoint& theta, const FdStep& step,
                                  const Observable& f,
                                  std::span<const std::int64_t> x0, double t,
                                  std::uint64_t n_paths, CouplingMethod method,
                                  std::uint64_t master_seed, unsigned workers = 0,
                                  const std::optional<ParamBox>& box = std::nullopt) {
  if (n_paths < 2) throw UsageError("need at least two paths");
  const PerturbVec eps = step.as_vector(network);
  detail::check_box(network, theta, eps, box);

  const auto samples = detail::run_pairs(network, theta, eps, x0, f, t, n_paths,
                                         method, master_seed, 0, workers);
  std::vector<double> diffs(n_paths);
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    diffs[i] = samples.f_perturbed[i] - samples.f_nominal[i];
  }
  const SampleSummary s = summarize(diffs);
  EstimateReport report;
  report.value = s.mean / step.delta;
  report.std_error = s.se_mean() / std::abs(step.delta);
  report.n_paths = n_paths;
  report.master_seed = master_seed;
  report.method = method;
  report.epsilon = eps;
  return report;
}

// Sample variance of the difference together with the per-leg variances and
// the covariance; Var(df) = Var(+) + Var(0) - 2 Cov holds exactly on samples.
inline VarianceDecomposition variance_decomposition(
    const ReactionNetwork& network, const ParamPoint& theta, const FdStep& step,
    const Observable& f, std::span<const std::int64_t> x0, double t,
    std::uint64_t n_paths, CouplingMethod method, std::uint64_t master_seed,
    unsigned workers = 0, const std::optional<ParamBox>& box = std::nullopt) {
  if (n_paths < 2) throw UsageError("need at least two paths");
  const PerturbVec eps = step.as_vector(network);
  detail::check_box(network, theta, eps, box);

  const auto samples = detail::run_pairs(network, theta, eps, x0, f, t, n_paths,
                                         method, master_seed, 0, workers);
  std::vector<double> diffs(n_paths);
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    diffs[i] = samples.f_perturbed[i] - samples.f_nominal[i];
  }
  VarianceDecomposition out;
  const SampleSummary sd = summarize(diffs);
  const SampleSummary sp = summarize(samples.f_perturbed);
  const SampleSummary sn = summarize(samples.f_nominal);
  out.var_difference = sd.variance;
  out.var_perturbed = sp.variance;
  out.var_nominal = sn.variance;
  out.covariance = sample_covariance(samples.f_perturbed, samples.f_nominal);
  out.se_var_difference = sd.se_variance();
  out.se_var_perturbed = sp.se_variance();
  out.se_var_nominal = sn.se_variance();
  out.n_paths = n_paths;
  return out;
}

// Monte Carlo estimate of E|X^{theta+eps}(t) - X^theta(t)|_1^r under the
// stacked coupling.
inline EstimateReport gap_moment(const ReactionNetwork& network,
                                 const ParamPoint& theta,
                                 std::span<const double> eps, int r,
                                 std::span<const std::int64_t> x0, double t,
                                 std::uint64_t n_paths, std::uint64_t master_seed,
                                 unsigned workers = 0,
                                 const std::optional<ParamBox>& box = std::nullopt) {
  if (r < 1) throw UsageError("moment order must be >= 1");
  if (n_paths < 2) throw UsageError("need at least two paths");
  detail::check_box(network, theta, eps, box);

  const Observable f = Observable::total_count(network);
  const auto samples =
      detail::run_pairs(network, theta, eps, x0, f, t, n_paths,
                        CouplingMethod::stacked, master_seed, 0, workers);
  std::vector<double> powered(n_paths);
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    powered[i] = std::pow(samples.gap_l1[i], r);
  }
  const SampleSummary s = summarize(powered);
  EstimateReport report;
  report.value = s.mean;
  report.std_error = s.se_mean();
  report.n_paths = n_paths;
  report.master_seed = master_seed;
  report.method = CouplingMethod::stacked;
  report.epsilon.assign(eps.begin(), eps.end());
  return report;
}

// Scans a decreasing grid of perturbation sizes along a fixed direction and
// fits log-log slopes.  Each grid point consumes its own disjoint block of
// path indices so the whole scan replays bit-identically.
inline ScanReport epsilon_scan(const ReactionNetwork& network,
                               const ParamPoint& theta,
                               std::span<const double> direction,
                               std::span<const double> eps_grid,
                               const Observable& f,
                               std::span<const std::int64_t> x0, double t,
                               std::uint64_t n_paths, CouplingMethod method,
                               std::span<const int> moment_orders,
                               std::uint64_t master_seed, unsigned workers = 0,
                               const std::optional<ParamBox>& box = std::nullopt) {
  if (eps_grid.size() < 3) {
    throw UsageError("epsilon scan needs at least three grid points");
  }
  for (std::size_t g = 1; g < eps_grid.size(); ++g) {
    if (!(eps_grid[g] < eps_grid[g - 1]) || !(eps_grid[g] > 0.0)) {
      throw UsageError("epsilon grid must be strictly decreasing and positive");
    }
  }
  if (direction.size() != theta.size()) {
    throw UsageError("direction vector has wrong dimension");
  }
  double dir_norm = 0.0;
  for (double v : direction) dir_norm += std::abs(v);
  if (!(dir_norm > 0.0)) throw UsageError("direction must be nonzero");

  ScanReport report;
  report.method = method;
  report.moment_orders.assign(moment_orders.begin(), moment_orders.end());

  std::vector<double> log_eps, log_var, w_var;
  std::vector<std::vector<double>> log_mom(moment_orders.size()),
      w_mom(moment_orders.size());

  for (std::size_t g = 0; g < eps_grid.size(); ++g) {
    PerturbVec eps(direction.size());
    for (std::size_t j = 0; j < eps.size(); ++j) {
      eps[j] = direction[j] / dir_norm * eps_grid[g];
    }
    detail::check_box(network, theta, eps, box);
    const auto samples =
        detail::run_pairs(network, theta, eps, x0, f, t, n_paths, method,
                          master_seed, g * n_paths, workers);
    std::vector<double> diffs(n_paths);
    for (std::uint64_t i = 0; i < n_paths; ++i) {
      diffs[i] = samples.f_perturbed[i] - samples.f_nominal[i];
    }
    const SampleSummary sd = summarize(diffs);

    ScanRow row;
    row.eps_l1 = eps_grid[g];
    row.var_difference = sd.variance;
    row.ci_half_width = 3.0 * sd.se_variance();
    for (std::size_t ri = 0; ri < moment_orders.size(); ++ri) {
      std::vector<double> powered(n_paths);
      for (std::uint64_t i = 0; i < n_paths; ++i) {
        powered[i] = std::pow(samples.gap_l1[i], moment_orders[ri]);
      }
      const SampleSummary sm = summarize(powered);
      row.moments.push_back(sm.mean);
      row.moment_ses.push_back(sm.se_mean());
      if (!(sm.mean > 0.0)) {
        throw UsageError(
            "gap moment estimate vanished at eps=" + std::to_string(eps_grid[g]) +
            "; increase paths or the grid values");
      }
      log_mom[ri].push_back(std::log(sm.mean));
      // Delta method: Var(log m) = Var(m) / m^2.
      const double se = sm.se_mean();
      if (!(se > 0.0)) {
        throw UsageError("degenerate gap sample (zero spread); cannot weight fit");
      }
      w_mom[ri].push_back(sm.mean * sm.mean / (se * se));
    }
    report.rows.push_back(std::move(row));

    if (!(sd.variance > 0.0)) {
      throw UsageError(
          "variance estimate vanished at eps=" + std::to_string(eps_grid[g]) +
          "; increase paths or the grid values");
    }
    log_eps.push_back(std::log(eps_grid[g]));
    log_var.push_back(std::log(sd.variance));
    const double se = sd.se_variance();
    if (!(se > 0.0)) {
      throw UsageError("degenerate difference sample (zero spread); cannot weight fit");
    }
    w_var.push_back(sd.variance * sd.variance / (se * se));
  }

  report.variance_slope = weighted_least_squares(log_eps, log_var, w_var);
  for (std::size_t ri = 0; ri < moment_orders.size(); ++ri) {
    report.moment_slopes.push_back(
        weighted_least_squares(log_eps, log_mom[ri], w_mom[ri]));
  }
  return report;
}

inline std::vector<ScanReport> epsilon_scan(
    const ReactionNetwork& network, const ParamPoint& theta,
    std::span<const double> direction, std::span<const double> eps_grid,
    const Observable& f, std::span<const std::int64_t> x0, double t,
    std::uint64_t n_paths, std::span<const CouplingMethod> methods,
    std::span<const int> moment_orders, std::uint64_t master_seed,
    unsigned workers = 0, const std::optional<ParamBox>& box = std::nullopt) {
  std::vector<ScanReport> reports;
  std::uint64_t method_offset = 0;
  for (CouplingMethod method : methods) {
    // Shift the seed so every method consumes disjoint path indices.
    reports.push_back(epsilon_scan(network, theta, direction, eps_grid, f, x0, t,
                                   n_paths, method, moment_orders,
                                   master_seed + method_offset, workers, box));
    ++method_offset;
  }
  return reports;
}

}  // namespace ccrn
