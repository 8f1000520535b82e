#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

#include "hifi/lmi.hpp"

namespace hifi {

struct SolverOptions {
  int max_iterations = 200;       ///< total Newton-step budget
  double kkt_tolerance = 1e-9;    ///< squared Newton decrement target
  double bound_radius = 1e6;      ///< |v_i| box keeping min-t bounded
  double initial_centering = 1.0; ///< first barrier weight on t
};

enum class SolveStatus { kFeasible, kInfeasibleWithinBounds, kMaxIterations };

struct SdpCertificate {
  SolveStatus status = SolveStatus::kMaxIterations;
  std::map<std::string, Eigen::MatrixXd> values;  ///< final iterate, by id
  /// max over constraints of lambda_max(F_k(values)); strictly feasible
  /// iff below -epsilon of the problem.
  double margin = 0.0;
  int iterations = 0;
  bool hit_bounds = false;  ///< some unknown finished near the box radius
};

/// Minimizes t subject to F_k(v) ≼ t·I over the bounded variable box by
/// log-det barrier path following; positive-definite-kind variables are
/// kept so by their own barriers. Deterministic for fixed inputs.
SdpCertificate solve_feasibility(const LmiProblem& problem,
                                 const SolverOptions& opts = {});

/// Independent certificate check: max over constraints of
/// lambda_max(F_k(values)) via a dense symmetric eigensolver. A negative
/// return certifies strict feasibility. Throws std::domain_error when a
/// variable is missing from `values`.
double certify(const LmiProblem& problem,
               const std::map<std::string, Eigen::MatrixXd>& values);

}  // namespace hifi
