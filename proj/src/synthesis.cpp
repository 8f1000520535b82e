#include "hifi/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hifi/errors.hpp"

namespace hifi {
namespace {

// The delay-dependent conditions divide by tau_max; the delay-free limit
// is taken at a small positive horizon instead (a certificate over
// [0, kMinTau] covers the zero-delay case). The horizon must not be too
// small: the assembled constants grow like 1/tau, the strictness
// threshold scales with them, and below ~1e-4 no attenuation level under
// one can clear it.
constexpr double kMinTau = 1e-3;

// Both synthesis-stage LMIs admit feasible points of arbitrarily large
// scale: the certificate blocks can grow along flat directions, and the
// barrier center drifts toward the variable box along them. In the design
// stage the drift ruins gain recovery (I - XY turns nearly singular
// relative to its largest singular value); in the verification stage the
// flat directions leave the Newton model with box-only curvature ~1/r²,
// so the centering steps degenerate and the solve stalls far from the
// optimum. A tight box fixes both: it removes the drift and lifts the
// flat-direction curvature. The caller's wider bounds are only consulted
// when the tight box truly contains no feasible point. The radius trades
// certificate health (tighter is safer) against estimation quality of the
// recovered filter (wider is better); 1e4 holds every certificate block
// comfortably for plants at the bundled study's scale.
constexpr double kConditioningRadius = 1e4;

std::vector<double> q1_grid(const SynthesisOptions& opts) {
  if (!(opts.q1_min > 0.0) || !(opts.q1_max >= opts.q1_min) ||
      opts.q1_count < 1)
    throw std::domain_error("synthesize: invalid q1 grid");
  const double lo = std::log10(opts.q1_min);
  const double hi = std::log10(opts.q1_max);
  std::vector<double> exponents;
  for (int i = 0; i < opts.q1_count; ++i)
    exponents.push_back(
        opts.q1_count == 1
            ? lo
            : lo + i * (hi - lo) / static_cast<double>(opts.q1_count - 1));
  // Try balanced weights first: ascending |log10 q1|, smaller value on
  // ties, so the selected weight is deterministic.
  std::stable_sort(exponents.begin(), exponents.end(),
                   [](double a, double b) {
                     if (std::abs(a) != std::abs(b))
                       return std::abs(a) < std::abs(b);
                     return a < b;
                   });
  std::vector<double> grid;
  for (double e : exponents) grid.push_back(std::pow(10.0, e));
  return grid;
}

}  // namespace

SdpCertificate solve_conditioned(const LmiProblem& problem,
                                 const SolverOptions& opts) {
  SolverOptions tight = opts;
  tight.bound_radius = std::min(opts.bound_radius, kConditioningRadius);
  SdpCertificate cert = solve_feasibility(problem, tight);
  if (cert.status == SolveStatus::kFeasible ||
      tight.bound_radius == opts.bound_radius)
    return cert;
  const int spent = cert.iterations;
  cert = solve_feasibility(problem, opts);
  cert.iterations += spent;
  return cert;
}

RecoveredGains recover_gains(const Matrix5& X, const Matrix5& Y,
                             const Matrix5& script_A,
                             const Matrix54& script_B,
                             const Matrix45& script_C,
                             const AugmentedDelaySystem& sys) {
  Eigen::SelfAdjointEigenSolver<Matrix5> eig_x(X), eig_y(Y);
  if (eig_x.eigenvalues().minCoeff() <= 0.0 ||
      eig_y.eigenvalues().minCoeff() <= 0.0)
    throw std::domain_error("recover_gains: X and Y must be positive definite");

  const Matrix5 product = Matrix5::Identity() - X * Y;
  Eigen::JacobiSVD<Matrix5> svd(product,
                                Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix<double, 5, 1> sigma = svd.singularValues();
  if (sigma(0) <= 0.0 || sigma(4) < 1e-10 * sigma(0))
    throw NumericalFailure(
        "recover_gains: I - XY is singular to tolerance; re-solve with X "
        "perturbed by +1e-6 I");

  const Eigen::Matrix<double, 5, 1> sqrt_sigma = sigma.cwiseSqrt();
  RecoveredGains out;
  out.M = svd.matrixU() * sqrt_sigma.asDiagonal();
  out.N = svd.matrixV() * sqrt_sigma.asDiagonal();

  const Eigen::FullPivLU<Matrix5> lu_n(out.N);
  const Eigen::FullPivLU<Matrix5> lu_m(out.M);
  if (!lu_n.isInvertible() || !lu_m.isInvertible())
    throw NumericalFailure("recover_gains: degenerate square-root factors");

  const Matrix45 cs = sys.C_a0 + sys.C_a1;
  out.gains.K_B = lu_n.solve(script_B);
  // Right-division by Mᵀ via A (Mᵀ)⁻¹ = (M⁻¹ Aᵀ)ᵀ.
  out.gains.K_C =
      lu_m.solve(Eigen::Matrix<double, 5, 4>(script_C.transpose()))
          .transpose();
  const Matrix5 core = script_A - Y * sys.A_a * X - script_B * cs * X;
  out.gains.K_A =
      lu_m.solve(Matrix5(lu_n.solve(core).transpose())).transpose();

  Matrix10 phi1 = Matrix10::Zero(), phi2 = Matrix10::Zero();
  phi1.topLeftCorner<5, 5>() = X;
  phi1.topRightCorner<5, 5>().setIdentity();
  phi1.bottomLeftCorner<5, 5>() = out.M.transpose();
  phi2.topLeftCorner<5, 5>().setIdentity();
  phi2.topRightCorner<5, 5>() = Y;
  phi2.bottomRightCorner<5, 5>() = out.N.transpose();
  const Eigen::FullPivLU<Matrix10> lu_phi1(phi1);
  if (!lu_phi1.isInvertible())
    throw NumericalFailure("recover_gains: state-transformation block is "
                           "singular");
  // P Φ1 = Φ2  =>  Φ1ᵀ Pᵀ = Φ2ᵀ; P is symmetric up to roundoff.
  const Matrix10 p_raw =
      Eigen::FullPivLU<Matrix10>(phi1.transpose())
          .solve(Matrix10(phi2.transpose()))
          .transpose();
  out.P = 0.5 * (p_raw + p_raw.transpose());
  return out;
}

SynthesisResult synthesize(const AugmentedDelaySystem& sys, double gamma,
                           const SynthesisOptions& opts) {
  if (!(gamma > 0.0))
    throw std::domain_error("synthesize: gamma must be positive");
  const double tau = std::max(sys.tau_max, kMinTau);

  std::vector<std::pair<double, double>> attempts;
  int iterations = 0;
  for (double q1 : q1_grid(opts)) {
    LmiProblem problem = assemble_synthesis_lmi(sys, gamma, tau, q1);
    if (opts.epsilon_override > 0.0) problem.epsilon = opts.epsilon_override;
    const SdpCertificate cert = solve_conditioned(problem, opts.solver);
    iterations += cert.iterations;
    attempts.emplace_back(q1, cert.margin);
    if (cert.status != SolveStatus::kFeasible) continue;

    const Matrix5 x = cert.values.at("X");
    const Matrix5 y = cert.values.at("Y");
    const Matrix5 script_a = cert.values.at("script_A");
    const Matrix54 script_b = cert.values.at("script_B");
    const Matrix45 script_c = cert.values.at("script_C");
    const double q2 = cert.values.at("Q2")(0, 0);

    const RecoveredGains rec =
        recover_gains(x, y, script_a, script_b, script_c, sys);

    // Independent delay-dependent certificate with the recovered gains
    // fixed and the full-matrix weights free.
    LmiProblem verification =
        assemble_verification_lmi(sys, rec.gains, gamma, tau);
    if (opts.epsilon_override > 0.0)
      verification.epsilon = opts.epsilon_override;
    const SdpCertificate vcert = solve_conditioned(verification, opts.solver);
    iterations += vcert.iterations;
    if (vcert.status != SolveStatus::kFeasible) {
      std::ostringstream msg;
      msg << "synthesize: design at q1=" << q1
          << " failed re-certification (margin " << vcert.margin << ")";
      throw CertificationFailure(msg.str());
    }

    SynthesisResult result;
    result.gains = rec.gains;
    result.X = x;
    result.Y = y;
    result.script_A = script_a;
    result.script_B = script_b;
    result.script_C = script_c;
    result.M = rec.M;
    result.N = rec.N;
    result.P = rec.P;
    result.Q1 = q1 * Matrix5::Identity();
    result.Q2 = q2;
    result.gamma = gamma;
    result.tau_max = tau;
    result.q1_selected = q1;
    result.margin = vcert.margin;
    result.iterations = iterations;
    return result;
  }

  std::ostringstream msg;
  msg << "synthesize: no feasible design at gamma=" << gamma << " over "
      << attempts.size() << " delay weights";
  throw SynthesisInfeasible(msg.str(), attempts);
}

SynthesisResult minimize_gamma(const AugmentedDelaySystem& sys,
                               double tau_max,
                               const SynthesisOptions& opts) {
  AugmentedDelaySystem scoped = sys;
  scoped.tau_max = std::max(tau_max, kMinTau);
  scoped.tau_min = std::min(scoped.tau_min, scoped.tau_max);

  // A level only counts when the design both solves and re-certifies:
  // near the attenuation floor the recovered certificate can collapse
  // even though the restricted design LMI is still barely feasible.
  auto attempt =
      [&](double gamma) -> std::optional<SynthesisResult> {
    try {
      return synthesize(scoped, gamma, opts);
    } catch (const SynthesisInfeasible&) {
      return std::nullopt;
    } catch (const CertificationFailure&) {
      return std::nullopt;
    }
  };

  constexpr double kGammaCap = 1048576.0;  // 2^20
  double hi = 1.0;
  std::optional<SynthesisResult> best = attempt(hi);
  while (!best && hi < kGammaCap) {
    hi *= 2.0;
    best = attempt(hi);
  }
  if (!best)
    throw SynthesisInfeasible(
        "minimize_gamma: no feasible attenuation level up to 1048576", {});

  double lo = 0.0;
  while (hi - lo > 0.01 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (std::optional<SynthesisResult> r = attempt(mid)) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  return *best;
}

}  // namespace hifi
