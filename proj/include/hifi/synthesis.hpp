#pragma once

#include <Eigen/Dense>

#include "hifi/lmi.hpp"
#include "hifi/model.hpp"
#include "hifi/solver.hpp"

namespace hifi {

struct SynthesisOptions {
  SolverOptions solver;
  double q1_min = 1e-3;  ///< delay-weight grid lower bound
  double q1_max = 1e3;   ///< delay-weight grid upper bound
  int q1_count = 13;     ///< log-spaced grid size
  /// When positive, replaces the automatic strictness of every assembled
  /// problem.
  double epsilon_override = 0.0;
};

/// A synthesized filter together with the design-side unknowns and the
/// independently re-established delay-dependent certificate.
struct SynthesisResult {
  FilterGains gains;
  Matrix5 X, Y;          ///< design-side Lyapunov blocks
  Matrix5 script_A;      ///< variable-change unknowns the gains came from
  Matrix54 script_B;
  Matrix45 script_C;
  Matrix5 M, N;          ///< factors with M Nᵀ = I - X Y
  Matrix10 P;            ///< recovered certificate block
  Matrix5 Q1;            ///< delay weight used at design time (q1·I)
  double Q2 = 0.0;
  double gamma = 0.0;
  double tau_max = 0.0;
  double q1_selected = 0.0;
  double margin = 0.0;   ///< re-certification margin (negative)
  int iterations = 0;    ///< total solver Newton steps spent
};

struct RecoveredGains {
  FilterGains gains;
  Matrix10 P;
  Matrix5 M, N;
};

/// Reconstructs estimator gains from the design unknowns: factor
/// I - XY = U Σ Vᵀ, set M = U Σ^{1/2}, N = V Σ^{1/2}, then
///   K_B = N⁻¹ script_B,
///   K_C = script_C (Mᵀ)⁻¹,
///   K_A = N⁻¹ [script_A - Y A_a X - script_B (C_a0 + C_a1) X] (Mᵀ)⁻¹,
/// and P from P Φ1 = Φ2 with Φ1 = [[X, I], [Mᵀ, 0]],
/// Φ2 = [[I, Y], [0, Nᵀ]]. Throws NumericalFailure when I - XY is
/// singular to tolerance (no silent regularization; re-solving with X
/// perturbed by +1e-6 I is the documented remedy) or Φ1 is singular.
RecoveredGains recover_gains(const Matrix5& X, const Matrix5& Y,
                             const Matrix5& script_A,
                             const Matrix54& script_B,
                             const Matrix45& script_C,
                             const AugmentedDelaySystem& sys);

/// Searches the delay-weight grid in ascending distance from q1 = 1; at
/// the first feasible weight, recovers gains and re-certifies them with
/// the full-matrix delay weight free. Throws SynthesisInfeasible when no
/// grid point is feasible and CertificationFailure when the recovered
/// design cannot be re-certified.
SynthesisResult synthesize(const AugmentedDelaySystem& sys, double gamma,
                           const SynthesisOptions& opts = {});

/// Smallest certified attenuation level: doubles from 1.0 (cap 2^20) to
/// find a feasible bracket, then bisects to 1% relative width.
SynthesisResult minimize_gamma(const AugmentedDelaySystem& sys,
                               double tau_max,
                               const SynthesisOptions& opts = {});

}  // namespace hifi
