#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "bilinsysid/em.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"
#include "ml_internal.hpp"

namespace bsid {

double log_likelihood(const SystemParams& params, const Dataset& dataset) {
  const double n_terms =
      static_cast<double>(dataset.length()) * params.dims.ny;
  return -0.5 * (ml_cost(params, dataset) + n_terms * std::log(2.0 * M_PI));
}

EstimationReport fit_em(const Dataset& dataset, const SystemParams& init,
                        const EmOptions& options) {
  require_feasible(init, "fit_em");
  if (options.max_iters < 1 || options.epsilon < 0.0) {
    throw ParamError("fit_em: invalid options");
  }
  const auto t_start = std::chrono::steady_clock::now();

  EstimationReport report;
  if (!check_input_excitation(dataset)) {
    report.warnings.push_back(
        "input sequence fails the persistent-excitation rank check "
        "(Assumption on inputs)");
  }
  if (!check_output_excitation(dataset)) {
    report.warnings.push_back(
        "input/output stack fails the output excitation rank check "
        "(Assumption on outputs)");
  }

  SystemParams params = init;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (options.record_trace) {
    const double ll =
        options.monotonicity_audit ? log_likelihood(params, dataset) : nan;
    report.trace.push_back(
        {0, nan, 0.0, 0.0, ll, min_covariance_eigenvalue(params)});
  }

  report.termination = "max_iters";
  int k = 0;
  for (; k < options.max_iters; ++k) {
    SystemParams next;
    try {
      const FilterResult filt = kalman_filter(params, dataset);
      const SmootherResult smooth = rts_smooth(params, filt);
      next = m_step(smooth, dataset);
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (EM iteration " << k + 1 << ")";
      throw ConditioningError(os.str());
    }

    const std::vector<std::string> violations = validate_params(next);
    if (!violations.empty()) {
      std::ostringstream os;
      os << "fit_em: iterate left the feasible set at iteration " << k + 1
         << ":";
      for (const std::string& v : violations) {
        os << " [" << v << "]";
      }
      throw ConditioningError(os.str());
    }

    const double delta = param_distance(params, next);
    params = std::move(next);
    report.final_step_norm = delta;

    if (options.record_trace) {
      const double ll =
          options.monotonicity_audit ? log_likelihood(params, dataset) : nan;
      report.trace.push_back(
          {k + 1, nan, delta, 0.0, ll, min_covariance_eigenvalue(params)});
    }
    if (delta < options.epsilon) {
      report.termination = "epsilon";
      ++k;
      break;
    }
  }

  report.params = params;
  report.iterations = k;
  // One marginal evaluation so every EM report carries its final ML cost;
  // the marginal form stays cheap at large nD.
  report.final_cost = detail::marginal_cost(params, dataset);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

EstimationReport fit_em_multi(const Dataset& dataset,
                              const std::vector<SystemParams>& inits,
                              const EmOptions& options) {
  if (inits.empty()) {
    throw ParamError("fit_em_multi: need at least one init");
  }
  EstimationReport best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const SystemParams& init : inits) {
    EstimationReport rep = fit_em(dataset, init, options);
    // Lower ML cost means higher audit log-likelihood.
    if (rep.final_cost < best_cost) {
      best_cost = rep.final_cost;
      best = std::move(rep);
    }
  }
  return best;
}

}  // namespace bsid
