#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hifi/model.hpp"

namespace hifi {

/// A scalar-parameterized matrix unknown of an LMI problem. Symmetric
/// positive-definite variables are parameterized by their upper triangle
/// (column-major order of (i,j) with i <= j); general variables entrywise
/// (column-major). The ordering is fixed so certificates reproduce.
struct MatrixVariable {
  enum class Kind { kSymmetricPositiveDefinite, kGeneral };

  std::string id;
  int rows = 0;
  int cols = 0;
  Kind kind = Kind::kGeneral;

  int param_count() const {
    return kind == Kind::kSymmetricPositiveDefinite ? rows * (rows + 1) / 2
                                                    : rows * cols;
  }
};

/// One affine contribution left * V * right (or left * Vᵀ * right) placed
/// at element offset (row, col) of the block matrix. Every term is
/// symmetrized structurally: the placed block's transpose is always added
/// at (col, row), so a term on the diagonal contributes M + Mᵀ and
/// inherently symmetric diagonal terms carry 1/2 coefficients.
struct AffineTerm {
  int row = 0;
  int col = 0;
  Eigen::MatrixXd left;
  int variable = 0;  ///< index into LmiProblem::variables
  Eigen::MatrixXd right;
  bool transpose_variable = false;
};

/// F(v) = constant + sum of symmetrized affine terms, required ≺ −ε·I.
struct AffineMatrixInequality {
  int dimension = 0;
  Eigen::MatrixXd constant;
  std::vector<AffineTerm> terms;
};

/// A feasibility problem: find variable values with every constraint
/// negative definite with strictness margin epsilon.
struct LmiProblem {
  std::vector<MatrixVariable> variables;
  std::vector<AffineMatrixInequality> constraints;
  double epsilon = 0.0;

  int total_params() const;
  int param_offset(int variable_index) const;
  int variable_index(const std::string& id) const;  ///< -1 if absent

  /// Reads variable `variable_index` out of a packed parameter vector.
  Eigen::MatrixXd unpack(int variable_index,
                         const Eigen::VectorXd& params) const;
  /// Writes a full matrix value into the packed parameter vector.
  /// Symmetric variables are stored from the upper triangle.
  void pack(int variable_index, const Eigen::MatrixXd& value,
            Eigen::VectorXd& params) const;

  /// Dense evaluation of constraint k at the packed parameter vector.
  Eigen::MatrixXd evaluate(int constraint, const Eigen::VectorXd& params) const;
};

/// Extended-state realization of the estimation-error dynamics: with
/// xi = [xa; xh],
///   dxi/dt = A_bar xi + A_bar_d xa(t - tau) + B_bar w,   e = C_bar xi.
struct ErrorSystem {
  Eigen::Matrix<double, 10, 10> A_bar;
  Eigen::Matrix<double, 10, 5> A_bar_d;
  Eigen::Matrix<double, 10, 1> B_bar;
  Eigen::Matrix<double, 4, 10> C_bar;
};

ErrorSystem build_error_system(const AugmentedDelaySystem& sys,
                               const FilterGains& gains);

/// Delay-dependent certificate condition for fixed gains: one 21×21
/// constraint, affine in P ∈ S^10, Q1 ∈ S^5, Q2 ∈ S^1 (all positive
/// definite). Feasibility proves the error system asymptotically stable
/// with disturbance attenuation gamma for every delay in [0, tau_max].
LmiProblem assemble_verification_lmi(const AugmentedDelaySystem& sys,
                                     const FilterGains& gains, double gamma,
                                     double tau_max);

/// Congruence-transformed design condition with the decision change that
/// makes it jointly affine: one 26×26 constraint in X, Y ∈ S^5,
/// script_A ∈ R^{5×5}, script_B ∈ R^{5×4}, script_C ∈ R^{4×5}, Q2 ∈ S^1,
/// with the delay weight frozen to q1·I (its inverse block to (1/q1)·I),
/// plus the 10×10 coupling constraint [[X, I], [I, Y]] ≻ 0.
LmiProblem assemble_synthesis_lmi(const AugmentedDelaySystem& sys,
                                  double gamma, double tau_max, double q1);

/// Negative-definiteness of [[S11, S12], [S12ᵀ, S22]] decided through the
/// complement: S22 ≺ 0 and S11 − S12 S22⁻¹ S12ᵀ ≺ 0.
/// Throws NumericalFailure when S22 is singular to working precision.
bool schur_check(const Eigen::MatrixXd& s11, const Eigen::MatrixXd& s12,
                 const Eigen::MatrixXd& s22);

/// Default strictness for an assembled problem:
/// 1e-7 · (1 + max over constraints of ‖constant‖_∞).
double default_epsilon(const std::vector<AffineMatrixInequality>& constraints);

}  // namespace hifi
