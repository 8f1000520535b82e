#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "hifi/errors.hpp"
#include "hifi/lmi.hpp"
#include "hifi/model.hpp"
#include "test_helpers.hpp"

using namespace hifi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int rows, int cols, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

MatrixXd random_symmetric(int n, std::mt19937& rng) {
  const MatrixXd r = random_matrix(n, n, rng);
  return 0.5 * (r + r.transpose());
}

double max_eig(const MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().maxCoeff();
}

FilterGains random_gains(std::mt19937& rng) {
  FilterGains gains;
  gains.K_A = random_matrix(5, 5, rng);
  gains.K_B = random_matrix(5, 4, rng);
  gains.K_C = random_matrix(4, 5, rng);
  return gains;
}

VectorXd packed(const LmiProblem& problem,
                const std::vector<std::pair<std::string, MatrixXd>>& values) {
  VectorXd params = VectorXd::Zero(problem.total_params());
  for (const auto& [id, value] : values)
    problem.pack(problem.variable_index(id), value, params);
  return params;
}

// Hand-built dense form of the fixed-gain certificate condition, written
// block by block from the error system: independent of the affine-term
// machinery under test.
MatrixXd dense_verification(const AugmentedDelaySystem& sys,
                            const FilterGains& gains, double gamma,
                            double tau, const MatrixXd& p, const MatrixXd& q1,
                            double q2) {
  const ErrorSystem err = build_error_system(sys, gains);
  MatrixXd i0 = MatrixXd::Zero(5, 10);
  i0.leftCols(5).setIdentity();
  const MatrixXd a_shift = err.A_bar + err.A_bar_d * i0;

  MatrixXd f = MatrixXd::Zero(21, 21);
  f.block(0, 0, 10, 10) = p * a_shift + a_shift.transpose() * p +
                          tau * i0.transpose() * q1 * i0;
  f.block(0, 10, 10, 1) = p * err.B_bar;
  f.block(0, 11, 10, 4) = err.C_bar.transpose();
  f.block(0, 15, 10, 5) = p * err.A_bar_d * sys.A_a;
  f.block(0, 20, 10, 1) = p * err.A_bar_d * sys.B_a;
  f(10, 10) = -gamma * gamma + tau * q2;
  f.block(11, 11, 4, 4) = -Eigen::Matrix4d::Identity();
  f.block(15, 15, 5, 5) = -q1 / tau;
  f(20, 20) = -q2 / tau;
  return MatrixXd(f.selfadjointView<Eigen::Upper>());
}

// Hand-built dense form of the design condition at frozen delay weight.
MatrixXd dense_synthesis(const AugmentedDelaySystem& sys, double gamma,
                         double tau, double q1, const MatrixXd& x,
                         const MatrixXd& y, const MatrixXd& sa,
                         const MatrixXd& sb, const MatrixXd& sc, double q2) {
  const MatrixXd a = sys.A_a;
  const MatrixXd b = sys.B_a;
  const MatrixXd cs = sys.C_a0 + sys.C_a1;
  const MatrixXd i5 = MatrixXd::Identity(5, 5);

  MatrixXd f = MatrixXd::Zero(26, 26);
  f.block(0, 0, 5, 5) = a * x + x * a.transpose();
  f.block(0, 5, 5, 5) = a + sa.transpose();
  f.block(5, 5, 5, 5) = y * a + a.transpose() * y + sb * cs +
                        cs.transpose() * sb.transpose();
  f.block(0, 10, 5, 1) = b;
  f.block(5, 10, 5, 1) = y * b + sb * sys.D_a;
  f.block(0, 11, 5, 4) = x * sys.E_a.transpose() - sc.transpose();
  f.block(5, 11, 5, 4) = sys.E_a.transpose();
  f.block(5, 15, 5, 5) = sb * sys.C_a1 * a;
  f.block(5, 20, 5, 1) = sb * sys.C_a1 * b;
  f.block(0, 21, 5, 5) = x;
  f.block(5, 21, 5, 5) = i5;
  f(10, 10) = -gamma * gamma + tau * q2;
  f.block(11, 11, 4, 4) = -Eigen::Matrix4d::Identity();
  f.block(15, 15, 5, 5) = -(q1 / tau) * i5;
  f(20, 20) = -q2 / tau;
  f.block(21, 21, 5, 5) = -1.0 / (q1 * tau) * i5;
  return MatrixXd(f.selfadjointView<Eigen::Upper>());
}

double inf_norm(const MatrixXd& m) { return m.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("error-system blocks follow the gain wiring") {
  const AugmentedDelaySystem& sys = test_helpers::study_system();
  std::mt19937 rng(7);

  SUBCASE("zero gains decouple the estimator") {
    const ErrorSystem err = build_error_system(sys, FilterGains{
        Matrix5::Zero(), Matrix54::Zero(), Matrix45::Zero()});
    CHECK((err.A_bar.topLeftCorner<5, 5>() == sys.A_a));
    CHECK(err.A_bar.topRightCorner<5, 5>().isZero(0.0));
    CHECK(err.A_bar.bottomRows<5>().isZero(0.0));
    CHECK(err.A_bar_d.isZero(0.0));
    CHECK((err.B_bar.topRows<5>() == sys.B_a));
    CHECK(err.B_bar.bottomRows<5>().isZero(0.0));
    CHECK((err.C_bar.leftCols<5>() == sys.E_a));
    CHECK(err.C_bar.rightCols<5>().isZero(0.0));
  }

  SUBCASE("delayed block keys on the remote channel only") {
    const FilterGains gains = random_gains(rng);
    const ErrorSystem err = build_error_system(sys, gains);
    // The delayed read map has a single nonzero column (the road state),
    // so the delayed block is K_B's last column placed there.
    CHECK(err.A_bar_d.topRows<5>().isZero(0.0));
    CHECK(err.A_bar_d.bottomRows<5>().leftCols<4>().isZero(0.0));
    CHECK((err.A_bar_d.bottomRows<5>().col(4) == gains.K_B.col(3)));
  }

  SUBCASE("general gains produce the block products") {
    const FilterGains gains = random_gains(rng);
    const ErrorSystem err = build_error_system(sys, gains);
    CHECK((err.A_bar.bottomLeftCorner<5, 5>() == gains.K_B * sys.C_a0));
    CHECK((err.A_bar.bottomRightCorner<5, 5>() == gains.K_A));
    CHECK((err.B_bar.bottomRows<5>() == gains.K_B * sys.D_a));
    CHECK((err.C_bar.rightCols<5>() == -gains.K_C));
  }

  SUBCASE("non-finite gains are rejected") {
    FilterGains gains = random_gains(rng);
    gains.K_A(2, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(build_error_system(sys, gains), std::domain_error);
  }
}

TEST_CASE("certificate condition matches its hand-built dense form") {
  const AugmentedDelaySystem& sys = test_helpers::study_system();
  const SynthesisResult& design = test_helpers::study_design();
  const double gamma = 0.5, tau = 0.5;

  const LmiProblem problem =
      assemble_verification_lmi(sys, design.gains, gamma, tau);
  REQUIRE(problem.constraints.size() == 1);
  CHECK(problem.constraints[0].dimension == 21);
  CHECK(problem.epsilon == default_epsilon(problem.constraints));

  SUBCASE("identity assignment reproduces the dense matrix exactly") {
    const VectorXd params =
        packed(problem, {{"P", MatrixXd::Identity(10, 10)},
                         {"Q1", MatrixXd::Identity(5, 5)},
                         {"Q2", MatrixXd::Identity(1, 1)}});
    const MatrixXd f = problem.evaluate(0, params);
    const MatrixXd expected =
        dense_verification(sys, design.gains, gamma, tau,
                           MatrixXd::Identity(10, 10),
                           MatrixXd::Identity(5, 5), 1.0);
    CHECK(inf_norm(f - expected) <= 1e-12);
    CHECK((f == f.transpose()));  // structural symmetry, no rounding slack
  }

  SUBCASE("random symmetric assignments agree entrywise") {
    std::mt19937 rng(21);
    for (int rep = 0; rep < 5; ++rep) {
      const MatrixXd p = random_symmetric(10, rng);
      const MatrixXd q1 = random_symmetric(5, rng);
      const double q2 = std::normal_distribution<double>()(rng);
      const VectorXd params = packed(
          problem,
          {{"P", p}, {"Q1", q1}, {"Q2", MatrixXd::Constant(1, 1, q2)}});
      const MatrixXd f = problem.evaluate(0, params);
      const MatrixXd expected =
          dense_verification(sys, design.gains, gamma, tau, p, q1, q2);
      CHECK(inf_norm(f - expected) <= 1e-12 * (1.0 + inf_norm(expected)));
    }
  }

  SUBCASE("parameter domains") {
    CHECK_THROWS_AS(assemble_verification_lmi(sys, design.gains, 0.0, tau),
                    std::domain_error);
    CHECK_THROWS_AS(assemble_verification_lmi(sys, design.gains, gamma, 0.0),
                    std::domain_error);
  }
}

TEST_CASE("zero-gain certificate structure with unit Lyapunov block") {
  const AugmentedDelaySystem& sys = test_helpers::study_system();
  const double gamma = 0.5, tau = 0.5;
  const FilterGains zero{Matrix5::Zero(), Matrix54::Zero(), Matrix45::Zero()};

  const LmiProblem problem =
      assemble_verification_lmi(sys, zero, gamma, tau);
  std::mt19937 rng(5);
  const MatrixXd q1 = random_symmetric(5, rng);
  const VectorXd params = packed(problem, {{"P", MatrixXd::Identity(10, 10)},
                                           {"Q1", q1},
                                           {"Q2", MatrixXd::Identity(1, 1)}});
  const MatrixXd f = problem.evaluate(0, params);

  MatrixXd a_blk = MatrixXd::Zero(10, 10);
  a_blk.topLeftCorner(5, 5) = sys.A_a;
  MatrixXd i0 = MatrixXd::Zero(5, 10);
  i0.leftCols(5).setIdentity();
  const MatrixXd psi =
      a_blk + a_blk.transpose() + tau * i0.transpose() * q1 * i0;

  CHECK(inf_norm(f.block(0, 0, 10, 10) - psi) <= 1e-12 * (1.0 + inf_norm(psi)));
  // With no estimator feedback the delayed-state couplings vanish and the
  // disturbance column reduces to the open-loop input.
  CHECK(f.block(0, 15, 10, 5).isZero(0.0));
  CHECK(f.block(0, 20, 10, 1).isZero(0.0));
  CHECK((f.block(0, 10, 5, 1) == sys.B_a));
  CHECK(f.block(5, 10, 5, 1).isZero(0.0));
}

TEST_CASE("design condition matches its hand-built dense form") {
  const AugmentedDelaySystem& sys = test_helpers::study_system();
  const double gamma = 0.5, tau = 0.5, q1 = 0.7;

  const LmiProblem problem = assemble_synthesis_lmi(sys, gamma, tau, q1);
  REQUIRE(problem.constraints.size() == 2);
  CHECK(problem.constraints[0].dimension == 26);
  CHECK(problem.constraints[1].dimension == 10);
  CHECK(problem.epsilon == default_epsilon(problem.constraints));

  std::mt19937 rng(26);
  const MatrixXd x = random_symmetric(5, rng);
  const MatrixXd y = random_symmetric(5, rng);
  const MatrixXd sa = random_matrix(5, 5, rng);
  const MatrixXd sb = random_matrix(5, 4, rng);
  const MatrixXd sc = random_matrix(4, 5, rng);
  const double q2 = 1.3;
  const VectorXd params = packed(problem, {{"X", x},
                                           {"Y", y},
                                           {"script_A", sa},
                                           {"script_B", sb},
                                           {"script_C", sc},
                                           {"Q2", MatrixXd::Constant(1, 1, q2)}});

  SUBCASE("main inequality") {
    const MatrixXd f = problem.evaluate(0, params);
    const MatrixXd expected =
        dense_synthesis(sys, gamma, tau, q1, x, y, sa, sb, sc, q2);
    CHECK(inf_norm(f - expected) <= 1e-12 * (1.0 + inf_norm(expected)));
    CHECK((f == f.transpose()));
  }

  SUBCASE("coupling inequality is the negated pairing block") {
    const MatrixXd f = problem.evaluate(1, params);
    MatrixXd coupling = MatrixXd::Zero(10, 10);
    coupling.topLeftCorner(5, 5) = x;
    coupling.topRightCorner(5, 5).setIdentity();
    coupling.bottomLeftCorner(5, 5).setIdentity();
    coupling.bottomRightCorner(5, 5) = y;
    CHECK(inf_norm(f + coupling) <= 1e-12 * (1.0 + inf_norm(coupling)));
  }

  SUBCASE("zero transfer variables leave the open-loop skeleton") {
    const VectorXd zero_params =
        packed(problem, {{"X", x},
                         {"Y", y},
                         {"script_A", MatrixXd::Zero(5, 5)},
                         {"script_B", MatrixXd::Zero(5, 4)},
                         {"script_C", MatrixXd::Zero(4, 5)},
                         {"Q2", MatrixXd::Constant(1, 1, q2)}});
    const MatrixXd f = problem.evaluate(0, zero_params);
    CHECK(inf_norm(f.block(0, 5, 5, 5) - sys.A_a) <= 1e-12);
    CHECK(f.block(5, 15, 5, 5).isZero(0.0));
    CHECK(f.block(5, 20, 5, 1).isZero(0.0));
    CHECK(inf_norm(f.block(0, 21, 5, 5) - x) <= 1e-12);
    CHECK((f.block(5, 21, 5, 5) == MatrixXd::Identity(5, 5)));
  }

  SUBCASE("non-positive frozen weight is rejected") {
    CHECK_THROWS_AS(assemble_synthesis_lmi(sys, gamma, tau, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(assemble_synthesis_lmi(sys, gamma, tau, -1.0),
                    std::domain_error);
  }
}

TEST_CASE("assembled constraints are affine in the packed parameters") {
  const AugmentedDelaySystem& sys = test_helpers::study_system();
  std::mt19937 rng(99);
  const FilterGains gains = random_gains(rng);

  const LmiProblem problems[] = {
      assemble_verification_lmi(sys, gains, 0.5, 0.5),
      assemble_synthesis_lmi(sys, 0.5, 0.5, 0.7)};
  for (const LmiProblem& problem : problems) {
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
      const int n = problem.total_params();
      const VectorXd v1 = VectorXd::NullaryExpr(
          n, [&](Eigen::Index) { return std::normal_distribution<double>()(rng); });
      const VectorXd v2 = VectorXd::NullaryExpr(
          n, [&](Eigen::Index) { return std::normal_distribution<double>()(rng); });
      const MatrixXd residual =
          problem.evaluate(static_cast<int>(k), v1 + v2) -
          problem.evaluate(static_cast<int>(k), v1) -
          problem.evaluate(static_cast<int>(k), v2) +
          problem.evaluate(static_cast<int>(k), VectorXd::Zero(n));
      CHECK(inf_norm(residual) <= 1e-12 * (1.0 + inf_norm(problem.evaluate(
                                               static_cast<int>(k), v1))));
    }
  }
}

TEST_CASE("packing round-trips and validates shapes") {
  const AugmentedDelaySystem& sys = test_helpers::study_system();
  const LmiProblem problem = assemble_synthesis_lmi(sys, 0.5, 0.5, 1.0);
  std::mt19937 rng(11);

  SUBCASE("symmetric and general variables round-trip") {
    VectorXd params = VectorXd::Zero(problem.total_params());
    const MatrixXd x = random_symmetric(5, rng);
    const MatrixXd sb = random_matrix(5, 4, rng);
    problem.pack(problem.variable_index("X"), x, params);
    problem.pack(problem.variable_index("script_B"), sb, params);
    CHECK((problem.unpack(problem.variable_index("X"), params) == x));
    CHECK((problem.unpack(problem.variable_index("script_B"), params) == sb));
  }

  SUBCASE("asymmetric value for a symmetric variable is rejected") {
    VectorXd params = VectorXd::Zero(problem.total_params());
    MatrixXd bad = random_symmetric(5, rng);
    bad(0, 1) += 1.0;
    CHECK_THROWS_AS(problem.pack(problem.variable_index("X"), bad, params),
                    std::domain_error);
  }

  SUBCASE("unknown variable ids resolve to -1") {
    CHECK(problem.variable_index("script_A") >= 0);
    CHECK(problem.variable_index("nope") == -1);
  }
}

TEST_CASE("block negativity test agrees with the eigenvalue oracle") {
  SUBCASE("scalar cases") {
    const MatrixXd m1 = MatrixXd::Constant(1, 1, -1.0);
    const MatrixXd half = MatrixXd::Constant(1, 1, 0.5);
    const MatrixXd two = MatrixXd::Constant(1, 1, 2.0);
    CHECK(schur_check(m1, half, m1));
    CHECK_FALSE(schur_check(m1, two, m1));
  }

  SUBCASE("degenerate and malformed blocks") {
    const MatrixXd m1 = MatrixXd::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(schur_check(m1, m1, MatrixXd::Zero(1, 1)),
                    NumericalFailure);
    CHECK_THROWS_AS(schur_check(m1, MatrixXd::Zero(1, 2), m1),
                    std::domain_error);
    MatrixXd asym = MatrixXd::Zero(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(schur_check(asym, MatrixXd::Zero(2, 2),
                                -MatrixXd::Identity(2, 2)),
                    std::domain_error);
  }

  SUBCASE("random 6x6 agreement with direct eigenvalues") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> shift(-1.0, 5.0);
    int negative = 0, indefinite = 0;
    for (int rep = 0; rep < 200; ++rep) {
      const MatrixXd s =
          random_symmetric(6, rng) - shift(rng) * MatrixXd::Identity(6, 6);
      const bool oracle = max_eig(s) < 0.0;
      (oracle ? negative : indefinite) += 1;
      CHECK(schur_check(s.topLeftCorner(4, 4), s.topRightCorner(4, 2),
                        s.bottomRightCorner(2, 2)) == oracle);
    }
    // The sample must exercise both verdicts to mean anything.
    CHECK(negative >= 10);
    CHECK(indefinite >= 10);
  }
}

TEST_CASE("weighted cross-term bound is positive semidefinite") {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> log_eps(-2.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = size(rng), m = size(rng);
    const MatrixXd x = random_matrix(n, m, rng);
    const MatrixXd y = random_matrix(n, m, rng);
    const double eps = std::pow(10.0, log_eps(rng));
    const MatrixXd bound = eps * x.transpose() * x +
                           (1.0 / eps) * y.transpose() * y -
                           x.transpose() * y - y.transpose() * x;
    const double lambda_min =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(bound).eigenvalues()
            .minCoeff();
    CHECK(lambda_min >= -1e-10);
  }
}

TEST_CASE("similarly ordered product integrals dominate the product of means") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> start(-2.0, 2.0);
  std::uniform_real_distribution<double> width(0.5, 3.0);
  std::uniform_real_distribution<double> coeff(0.0, 3.0);
  std::uniform_real_distribution<double> rate(-1.5, 1.5);
  std::uniform_int_distribution<int> family(0, 3);
  std::uniform_int_distribution<int> flip(0, 1);

  for (int rep = 0; rep < 100; ++rep) {
    const double a = start(rng);
    const double b = a + width(rng);
    const int kind = family(rng);
    const double c1 = coeff(rng), c2 = coeff(rng), c3 = rate(rng);
    const double sign = flip(rng) ? 1.0 : -1.0;
    const auto f = [&](double t) -> double {
      switch (kind) {
        case 0: return sign * (c1 * t + c2);
        case 1: return sign * (c1 * t * t * t + c2 * t);
        case 2: return sign * std::exp(c3 * t);
        default: return sign * (std::tanh(2.0 * t) + 0.3 * t + c2);
      }
    };

    // Trapezoidal quadrature of the two means on a fine shared grid.
    const int steps = 2000;
    const double h = (b - a) / steps;
    double mean_f = 0.0, mean_ff = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double t = a + i * h;
      const double weight = (i == 0 || i == steps) ? 0.5 : 1.0;
      mean_f += weight * f(t);
      mean_ff += weight * f(t) * f(t);
    }
    mean_f *= h / (b - a);
    mean_ff *= h / (b - a);
    CHECK(mean_ff >= mean_f * mean_f - 1e-9);
  }
}
