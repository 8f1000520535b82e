#include "hifi/lmi.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "hifi/errors.hpp"

namespace hifi {

int LmiProblem::total_params() const {
  int n = 0;
  for (const MatrixVariable& v : variables) n += v.param_count();
  return n;
}

int LmiProblem::param_offset(int variable_index) const {
  int off = 0;
  for (int i = 0; i < variable_index; ++i) off += variables[i].param_count();
  return off;
}

int LmiProblem::variable_index(const std::string& id) const {
  for (int i = 0; i < static_cast<int>(variables.size()); ++i)
    if (variables[i].id == id) return i;
  return -1;
}

Eigen::MatrixXd LmiProblem::unpack(int variable_index,
                                   const Eigen::VectorXd& params) const {
  const MatrixVariable& var = variables[variable_index];
  const int off = param_offset(variable_index);
  Eigen::MatrixXd value(var.rows, var.cols);
  if (var.kind == MatrixVariable::Kind::kSymmetricPositiveDefinite) {
    int k = off;
    for (int j = 0; j < var.cols; ++j)
      for (int i = 0; i <= j; ++i) {
        value(i, j) = params[k];
        value(j, i) = params[k];
        ++k;
      }
  } else {
    int k = off;
    for (int j = 0; j < var.cols; ++j)
      for (int i = 0; i < var.rows; ++i) value(i, j) = params[k++];
  }
  return value;
}

void LmiProblem::pack(int variable_index, const Eigen::MatrixXd& value,
                      Eigen::VectorXd& params) const {
  const MatrixVariable& var = variables[variable_index];
  if (value.rows() != var.rows || value.cols() != var.cols)
    throw std::domain_error("pack: value shape does not match variable '" +
                            var.id + "'");
  const int off = param_offset(variable_index);
  int k = off;
  if (var.kind == MatrixVariable::Kind::kSymmetricPositiveDefinite) {
    const double scale = value.lpNorm<Eigen::Infinity>();
    if ((value - value.transpose()).lpNorm<Eigen::Infinity>() >
        1e-9 * (1.0 + scale))
      throw std::domain_error("pack: variable '" + var.id +
                              "' must be symmetric");
    for (int j = 0; j < var.cols; ++j)
      for (int i = 0; i <= j; ++i) params[k++] = value(i, j);
  } else {
    for (int j = 0; j < var.cols; ++j)
      for (int i = 0; i < var.rows; ++i) params[k++] = value(i, j);
  }
}

Eigen::MatrixXd LmiProblem::evaluate(int constraint,
                                     const Eigen::VectorXd& params) const {
  const AffineMatrixInequality& con = constraints[constraint];
  Eigen::MatrixXd f = con.constant;
  for (const AffineTerm& term : con.terms) {
    Eigen::MatrixXd v = unpack(term.variable, params);
    if (term.transpose_variable) v.transposeInPlace();
    const Eigen::MatrixXd block = term.left * v * term.right;
    if (term.row == term.col) {
      // Symmetrize before accumulating so F(i,j) and F(j,i) see the same
      // addition sequence and the result is symmetric bit for bit.
      f.block(term.row, term.col, block.rows(), block.cols()) +=
          block + block.transpose();
    } else {
      f.block(term.row, term.col, block.rows(), block.cols()) += block;
      f.block(term.col, term.row, block.cols(), block.rows()) +=
          block.transpose();
    }
  }
  return f;
}

ErrorSystem build_error_system(const AugmentedDelaySystem& sys,
                               const FilterGains& gains) {
  if (!gains.K_A.allFinite() || !gains.K_B.allFinite() ||
      !gains.K_C.allFinite())
    throw std::domain_error("build_error_system: gains must be finite");

  ErrorSystem err;
  err.A_bar.setZero();
  err.A_bar.topLeftCorner<5, 5>() = sys.A_a;
  err.A_bar.bottomLeftCorner<5, 5>() = gains.K_B * sys.C_a0;
  err.A_bar.bottomRightCorner<5, 5>() = gains.K_A;

  err.A_bar_d.setZero();
  err.A_bar_d.bottomRows<5>() = gains.K_B * sys.C_a1;

  err.B_bar.topRows<5>() = sys.B_a;
  err.B_bar.bottomRows<5>() = gains.K_B * sys.D_a;

  err.C_bar.leftCols<5>() = sys.E_a;
  err.C_bar.rightCols<5>() = -gains.K_C;
  return err;
}

double default_epsilon(
    const std::vector<AffineMatrixInequality>& constraints) {
  double scale = 0.0;
  for (const AffineMatrixInequality& con : constraints)
    scale = std::max(scale, con.constant.lpNorm<Eigen::Infinity>());
  return 1e-7 * (1.0 + scale);
}

LmiProblem assemble_verification_lmi(const AugmentedDelaySystem& sys,
                                     const FilterGains& gains, double gamma,
                                     double tau_max) {
  if (!(gamma > 0.0))
    throw std::domain_error("assemble_verification_lmi: gamma must be > 0");
  if (!(tau_max > 0.0))
    throw std::domain_error("assemble_verification_lmi: tau_max must be > 0");

  const ErrorSystem err = build_error_system(sys, gains);
  Eigen::Matrix<double, 5, 10> i0;  // selects xa from the extended state
  i0.setZero();
  i0.leftCols<5>().setIdentity();

  LmiProblem problem;
  problem.variables = {
      {"P", 10, 10, MatrixVariable::Kind::kSymmetricPositiveDefinite},
      {"Q1", 5, 5, MatrixVariable::Kind::kSymmetricPositiveDefinite},
      {"Q2", 1, 1, MatrixVariable::Kind::kSymmetricPositiveDefinite}};
  const int P = 0, Q1 = 1, Q2 = 2;

  // Block layout: extended state (10), disturbance (1), error (4),
  // delay-excess witnesses (5 + 1).
  constexpr int kDim = 21;
  constexpr int bW = 10, bE = 11, bD1 = 15, bD2 = 20;

  AffineMatrixInequality con;
  con.dimension = kDim;
  con.constant = Eigen::MatrixXd::Zero(kDim, kDim);
  con.constant.block<10, 4>(0, bE) = err.C_bar.transpose();
  con.constant.block<4, 10>(bE, 0) = err.C_bar;
  con.constant(bW, bW) = -gamma * gamma;
  con.constant.block<4, 4>(bE, bE) = -Eigen::Matrix4d::Identity();

  const Eigen::MatrixXd i10 = Eigen::MatrixXd::Identity(10, 10);
  const Eigen::MatrixXd i5 = Eigen::MatrixXd::Identity(5, 5);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);

  // P (A_bar + A_bar_d I0) and its transpose.
  con.terms.push_back({0, 0, i10, P, err.A_bar + err.A_bar_d * i0, false});
  // tau_max I0ᵀ Q1 I0 (inherently symmetric: halved, symmetrizer doubles).
  con.terms.push_back({0, 0, 0.5 * tau_max * i0.transpose(), Q1, i0, false});
  con.terms.push_back({0, bW, i10, P, err.B_bar, false});
  con.terms.push_back({0, bD1, i10, P, err.A_bar_d * sys.A_a, false});
  con.terms.push_back({0, bD2, i10, P, err.A_bar_d * sys.B_a, false});
  con.terms.push_back({bW, bW, 0.5 * tau_max * one, Q2, one, false});
  con.terms.push_back({bD1, bD1, -0.5 / tau_max * i5, Q1, i5, false});
  con.terms.push_back({bD2, bD2, -0.5 / tau_max * one, Q2, one, false});

  problem.constraints.push_back(std::move(con));
  problem.epsilon = default_epsilon(problem.constraints);
  return problem;
}

LmiProblem assemble_synthesis_lmi(const AugmentedDelaySystem& sys,
                                  double gamma, double tau_max, double q1) {
  if (!(gamma > 0.0))
    throw std::domain_error("assemble_synthesis_lmi: gamma must be > 0");
  if (!(tau_max > 0.0))
    throw std::domain_error("assemble_synthesis_lmi: tau_max must be > 0");
  if (!(q1 > 0.0))
    throw std::domain_error("assemble_synthesis_lmi: q1 must be > 0");

  LmiProblem problem;
  problem.variables = {
      {"X", 5, 5, MatrixVariable::Kind::kSymmetricPositiveDefinite},
      {"Y", 5, 5, MatrixVariable::Kind::kSymmetricPositiveDefinite},
      {"script_A", 5, 5, MatrixVariable::Kind::kGeneral},
      {"script_B", 5, 4, MatrixVariable::Kind::kGeneral},
      {"script_C", 4, 5, MatrixVariable::Kind::kGeneral},
      {"Q2", 1, 1, MatrixVariable::Kind::kSymmetricPositiveDefinite}};
  const int X = 0, Y = 1, SA = 2, SB = 3, SC = 4, Q2 = 5;

  const Eigen::MatrixXd i5 = Eigen::MatrixXd::Identity(5, 5);
  const Eigen::MatrixXd i4 = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd a_a = sys.A_a;
  const Eigen::MatrixXd b_a = sys.B_a;
  const Eigen::MatrixXd cs = sys.C_a0 + sys.C_a1;  // total measurement map
  const Eigen::MatrixXd d_a = sys.D_a;
  const Eigen::MatrixXd e_a = sys.E_a;
  const Eigen::MatrixXd c1 = sys.C_a1;

  // Block layout: transformed state pair (5 + 5), disturbance (1),
  // error (4), delay-excess witnesses (5 + 1 + 5).
  constexpr int kDim = 26;
  constexpr int bX = 0, bY = 5, bW = 10, bE = 11, bD1 = 15, bD2 = 20,
                bD3 = 21;

  AffineMatrixInequality con;
  con.dimension = kDim;
  con.constant = Eigen::MatrixXd::Zero(kDim, kDim);
  con.constant.block<5, 5>(bX, bY) = a_a;
  con.constant.block<5, 5>(bY, bX) = a_a.transpose();
  con.constant.block<5, 1>(bX, bW) = b_a;
  con.constant.block<1, 5>(bW, bX) = b_a.transpose();
  con.constant.block<5, 4>(bY, bE) = e_a.transpose();
  con.constant.block<4, 5>(bE, bY) = e_a;
  con.constant.block<5, 5>(bY, bD3) = i5;
  con.constant.block<5, 5>(bD3, bY) = i5;
  con.constant(bW, bW) = -gamma * gamma;
  con.constant.block<4, 4>(bE, bE) = -i4;
  con.constant.block<5, 5>(bD1, bD1) = -(q1 / tau_max) * i5;
  con.constant.block<5, 5>(bD3, bD3) = -1.0 / (q1 * tau_max) * i5;

  con.terms.push_back({bX, bX, a_a, X, i5, false});
  con.terms.push_back({bX, bY, i5, SA, i5, true});
  con.terms.push_back({bY, bY, i5, Y, a_a, false});
  con.terms.push_back({bY, bY, i5, SB, cs, false});
  con.terms.push_back({bY, bW, i5, Y, b_a, false});
  con.terms.push_back({bY, bW, i5, SB, d_a, false});
  con.terms.push_back({bX, bE, i5, X, e_a.transpose(), false});
  con.terms.push_back({bX, bE, -i5, SC, i4, true});
  con.terms.push_back({bY, bD1, i5, SB, c1 * a_a, false});
  con.terms.push_back({bY, bD2, i5, SB, c1 * b_a, false});
  con.terms.push_back({bX, bD3, i5, X, i5, false});
  con.terms.push_back({bW, bW, 0.5 * tau_max * one, Q2, one, false});
  con.terms.push_back({bD2, bD2, -0.5 / tau_max * one, Q2, one, false});

  // Coupling [[X, I], [I, Y]] ≻ 0, assembled negated so the same
  // negative-definite sense applies to every constraint.
  AffineMatrixInequality coupling;
  coupling.dimension = 10;
  coupling.constant = Eigen::MatrixXd::Zero(10, 10);
  coupling.constant.block<5, 5>(0, 5) = -i5;
  coupling.constant.block<5, 5>(5, 0) = -i5;
  coupling.terms.push_back({0, 0, -0.5 * i5, X, i5, false});
  coupling.terms.push_back({5, 5, -0.5 * i5, Y, i5, false});

  problem.constraints.push_back(std::move(con));
  problem.constraints.push_back(std::move(coupling));
  problem.epsilon = default_epsilon(problem.constraints);
  return problem;
}

bool schur_check(const Eigen::MatrixXd& s11, const Eigen::MatrixXd& s12,
                 const Eigen::MatrixXd& s22) {
  if (s11.rows() != s11.cols() || s22.rows() != s22.cols())
    throw std::domain_error("schur_check: diagonal blocks must be square");
  if (s12.rows() != s11.rows() || s12.cols() != s22.rows())
    throw std::domain_error("schur_check: off-diagonal block shape mismatch");
  const double sym11 = (s11 - s11.transpose()).lpNorm<Eigen::Infinity>();
  const double sym22 = (s22 - s22.transpose()).lpNorm<Eigen::Infinity>();
  if (sym11 > 1e-9 * (1.0 + s11.lpNorm<Eigen::Infinity>()) ||
      sym22 > 1e-9 * (1.0 + s22.lpNorm<Eigen::Infinity>()))
    throw std::domain_error("schur_check: diagonal blocks must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig22(s22);
  const Eigen::VectorXd abs22 = eig22.eigenvalues().cwiseAbs();
  if (abs22.minCoeff() <= 1e-12 * std::max(1e-300, abs22.maxCoeff()))
    throw NumericalFailure("schur_check: lower-right block is singular");

  if (eig22.eigenvalues().maxCoeff() >= 0.0) return false;
  const Eigen::MatrixXd complement =
      s11 - s12 * s22.ldlt().solve(s12.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigc(complement);
  return eigc.eigenvalues().maxCoeff() < 0.0;
}

}  // namespace hifi
