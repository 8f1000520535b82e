#include "hifi/simulator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "hifi/errors.hpp"

namespace hifi {
namespace {

// Documented noise convention: 53-bit uniforms from mt19937_64 through
// the Box–Muller cosine branch, one standard normal per call. Bitwise
// reproducible within one implementation, statistically comparable
// across implementations.
class NoiseStream {
 public:
  explicit NoiseStream(unsigned long long seed) : rng_(seed) {}

  double next_normal() {
    const double u1 = 1.0 - to_unit(rng_());  // (0, 1] keeps log finite
    const double u2 = to_unit(rng_());
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
};

// Per-run delay evaluator; validates the contract against the system's
// admissible range up front (random walks are clipped into it instead).
class DelaySchedule {
 public:
  DelaySchedule(const DelayProfile& profile, const AugmentedDelaySystem& sys,
                int steps, double dt)
      : profile_(profile) {
    const double lo = sys.tau_min, hi = sys.tau_max;
    switch (profile.kind) {
      case DelayProfile::Kind::kConstant:
        if (profile.tau < lo - kSlack || profile.tau > hi + kSlack)
          throw std::domain_error(
              "delay-contract violation: constant delay outside "
              "[tau_min, tau_max]");
        break;
      case DelayProfile::Kind::kSinusoid: {
        const double amp = std::abs(profile.amplitude);
        if (!(profile.period > 0.0))
          throw std::domain_error("delay profile: period must be positive");
        if (profile.mean - amp < lo - kSlack ||
            profile.mean + amp > hi + kSlack)
          throw std::domain_error(
              "delay-contract violation: sinusoid range outside "
              "[tau_min, tau_max]");
        break;
      }
      case DelayProfile::Kind::kRandomWalk: {
        NoiseStream stream(profile.seed);
        double tau = std::clamp(0.5 * (lo + hi), lo, hi);
        walk_.reserve(steps);
        for (int k = 0; k < steps; ++k) {
          walk_.push_back(tau);
          tau = std::clamp(tau + profile.step_std * stream.next_normal(),
                           lo, hi);
        }
        (void)dt;
        break;
      }
    }
  }

  // Delay at an arbitrary stage time inside step `step`.
  double at(double t, int step) const {
    switch (profile_.kind) {
      case DelayProfile::Kind::kConstant:
        return profile_.tau;
      case DelayProfile::Kind::kSinusoid:
        return profile_.mean +
               profile_.amplitude *
                   std::sin(2.0 * std::numbers::pi * t / profile_.period);
      case DelayProfile::Kind::kRandomWalk:
        return walk_[step];  // held constant across the step's stages
    }
    return 0.0;
  }

 private:
  static constexpr double kSlack = 1e-12;
  DelayProfile profile_;
  std::vector<double> walk_;
};

void validate_config(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0))
    throw std::domain_error("simulate: dt must be positive");
  if (!(cfg.horizon >= cfg.dt))
    throw std::domain_error("simulate: horizon must cover at least one step");
  if (!(cfg.sigma_w >= 0.0))
    throw std::domain_error("simulate: sigma_w must be non-negative");
}

int step_count(const SimConfig& cfg) {
  return static_cast<int>(std::llround(cfg.horizon / cfg.dt));
}

void allocate_trace(SimTrace& trace, int n) {
  trace.t.resize(n);
  trace.x_a.resize(n, 5);
  trace.x_hat.resize(n, 5);
  trace.y.resize(n, 4);
  trace.e.resize(n, 4);
  trace.w.resize(n);
  trace.tau.resize(n);
}

// History of the road state at grid points with exact integer-offset
// reads, linear interpolation between samples, and exact closed-form
// propagation for lookups inside the step being integrated.
class RoadHistory {
 public:
  RoadHistory(double dt, double decay, double d_r) noexcept
      : dt_(dt), decay_(decay), d_r_(d_r) {}

  void push(double value) { samples_.push_back(value); }

  double read(double s, double w_held) const {
    if (s <= 0.0) return 0.0;  // pre-history convention: road at rest
    const double idx = s / dt_;
    const double snapped = std::round(idx);
    const auto last = static_cast<long long>(samples_.size()) - 1;
    if (std::abs(idx - snapped) <= 1e-9) {
      const auto i = static_cast<long long>(snapped);
      if (i >= 0 && i <= last) return samples_[static_cast<size_t>(i)];
    }
    const auto i = static_cast<long long>(std::floor(idx));
    if (i < last && i >= 0) {
      const double frac = idx - static_cast<double>(i);
      const double a = samples_[static_cast<size_t>(i)];
      const double b = samples_[static_cast<size_t>(i + 1)];
      return a + frac * (b - a);
    }
    // Beyond the newest sample: propagate the held-input road dynamics
    // exactly over the partial step.
    const double delta = s - static_cast<double>(last) * dt_;
    const double newest = samples_.back();
    if (decay_ > 0.0) {
      const double em = std::exp(-decay_ * delta);
      return em * newest + d_r_ * w_held * (1.0 - em) / decay_;
    }
    return newest + d_r_ * w_held * delta;
  }

 private:
  double dt_;
  double decay_;
  double d_r_;
  std::vector<double> samples_;
};

}  // namespace

SimTrace simulate(const AugmentedDelaySystem& sys, const FilterGains& gains,
                  const RoadProfile& road, const DelayProfile& delay,
                  const SimConfig& cfg) {
  validate_config(cfg);
  const int n = step_count(cfg);
  const double dt = cfg.dt;
  DelaySchedule schedule(delay, sys, n, dt);
  NoiseStream noise(cfg.seed);
  const double w_scale = cfg.sigma_w / std::sqrt(dt);

  SimTrace trace;
  allocate_trace(trace, n);

  const bool model_consistent = cfg.mode == SimConfig::Mode::kModelConsistent;

  if (model_consistent) {
    using State = Eigen::Matrix<double, 10, 1>;
    State z;
    z.head<5>() = cfg.x0;
    z.tail<5>() = cfg.x0;  // filter starts at the plant state
    RoadHistory history(dt, sys.road_decay, sys.D_r);
    history.push(z[4]);

    // Stacked measurement at stage time s given the held disturbance.
    auto measure = [&](const State& state, double s, int step, double w) {
      const double tau_s = schedule.at(s, step);
      Vector4 ya = sys.C_a0 * state.head<5>() + sys.D_a * w;
      ya += sys.C_a1.col(4) * history.read(s - tau_s, w);
      return ya;
    };
    auto deriv = [&](const State& state, double s, int step, double w) {
      State d;
      d.head<5>() = sys.A_a * state.head<5>() + sys.B_a * w;
      d.tail<5>() = gains.K_A * state.tail<5>() +
                    gains.K_B * measure(state, s, step, w);
      return d;
    };

    for (int k = 0; k < n; ++k) {
      const double t = k * dt;
      const double w = w_scale * noise.next_normal();
      const double tau_now = schedule.at(t, k);
      trace.t[k] = t;
      trace.x_a.row(k) = z.head<5>();
      trace.x_hat.row(k) = z.tail<5>();
      trace.w[k] = w;
      trace.tau[k] = tau_now;
      trace.y.row(k) = measure(z, t, k, w);
      trace.e.row(k) =
          (sys.E_a * z.head<5>() - gains.K_C * z.tail<5>()).transpose();

      if (k + 1 == n) break;
      const State k1 = deriv(z, t, k, w);
      const State k2 = deriv(z + 0.5 * dt * k1, t + 0.5 * dt, k, w);
      const State k3 = deriv(z + 0.5 * dt * k2, t + 0.5 * dt, k, w);
      const State k4 = deriv(z + dt * k3, t + dt, k, w);
      z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      history.push(z[4]);
    }
    return trace;
  }

  // Scenario mode: four plant states plus the filter; the road is the
  // prescribed profile, read in closed form (also for delayed lookups).
  const Matrix4 a = sys.A_a.topLeftCorner<4, 4>();
  const Vector4 b_r = sys.A_a.topRightCorner<4, 1>();
  const Vector4 b_w = sys.B_a.head<4>();
  const Matrix34 c0 = sys.C_a0.topLeftCorner<3, 4>();
  const Vector3 d0 = sys.D_a.head<3>();

  using State = Eigen::Matrix<double, 9, 1>;
  State z;
  z.head<4>() = cfg.x0.head<4>();
  z.tail<5>() = cfg.x0;

  auto measure = [&](const State& state, double s, int step, double w) {
    const double tau_s = schedule.at(s, step);
    Vector4 ya;
    ya.head<3>() = c0 * state.head<4>() + d0 * w;
    ya[3] = eval_road(road, s - tau_s) + sys.D_1 * w;
    return ya;
  };
  auto deriv = [&](const State& state, double s, int step, double w) {
    State d;
    d.head<4>() =
        a * state.head<4>() + b_r * eval_road(road, s) + b_w * w;
    d.tail<5>() = gains.K_A * state.tail<5>() +
                  gains.K_B * measure(state, s, step, w);
    return d;
  };

  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const double w = w_scale * noise.next_normal();
    trace.t[k] = t;
    trace.x_a.row(k).head<4>() = z.head<4>();
    trace.x_a(k, 4) = eval_road(road, t);
    trace.x_hat.row(k) = z.tail<5>();
    trace.w[k] = w;
    trace.tau[k] = schedule.at(t, k);
    trace.y.row(k) = measure(z, t, k, w);
    trace.e.row(k) =
        (z.head<4>() - gains.K_C * z.tail<5>()).transpose();

    if (k + 1 == n) break;
    const State k1 = deriv(z, t, k, w);
    const State k2 = deriv(z + 0.5 * dt * k1, t + 0.5 * dt, k, w);
    const State k3 = deriv(z + 0.5 * dt * k2, t + 0.5 * dt, k, w);
    const State k4 = deriv(z + dt * k3, t + dt, k, w);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return trace;
}

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const auto n = A.rows();
  const auto m = C.rows();
  if (A.cols() != n || C.cols() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != m || R.cols() != m)
    throw std::domain_error("solve_care: inconsistent dimensions");
  const Eigen::MatrixXd r_inv =
      R.llt().solve(Eigen::MatrixXd::Identity(m, m));

  Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(n, m);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  for (int iter = 0; iter < 60; ++iter) {
    const Eigen::MatrixXd f = A - gain * C;
    const Eigen::MatrixXd rhs = -(Q + gain * R * gain.transpose());
    // Lyapunov solve f P + P fᵀ = rhs through the Kronecker lift.
    Eigen::MatrixXd op(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        op.block(i * n, j * n, n, n) =
            (i == j ? Eigen::MatrixXd(f) : Eigen::MatrixXd::Zero(n, n)) +
            f(i, j) * eye;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
    if (!lu.isInvertible())
      throw NumericalFailure(
          "solve_care: Lyapunov operator is singular (closed loop not "
          "Hurwitz)");
    Eigen::VectorXd vec_rhs(n * n);
    for (Eigen::Index j = 0; j < n; ++j) vec_rhs.segment(j * n, n) = rhs.col(j);
    const Eigen::VectorXd vec_p = lu.solve(vec_rhs);
    Eigen::MatrixXd p_next(n, n);
    for (Eigen::Index j = 0; j < n; ++j) p_next.col(j) = vec_p.segment(j * n, n);
    p_next = 0.5 * (p_next + p_next.transpose()).eval();

    const double change = (p_next - p).lpNorm<Eigen::Infinity>();
    p = p_next;
    gain = p * C.transpose() * r_inv;
    if (change <= 1e-12 * (1.0 + p.lpNorm<Eigen::Infinity>())) return p;
  }
  throw NumericalFailure("solve_care: Newton iteration did not converge");
}

KalmanBaseline kalman_baseline(const Plant& plant, double q_w,
                               const Vector3& r_diag) {
  if (!(q_w >= 0.0))
    throw std::domain_error("kalman_baseline: q_w must be non-negative");
  if (!(r_diag.minCoeff() > 0.0))
    throw std::domain_error("kalman_baseline: r_diag must be positive");

  const Eigen::MatrixXd q = plant.B_w * q_w * plant.B_w.transpose();
  const Eigen::MatrixXd r = r_diag.asDiagonal();
  KalmanBaseline baseline;
  baseline.P_care = solve_care(plant.A, plant.C0, q, r);
  baseline.L = baseline.P_care * plant.C0.transpose() *
               r_diag.cwiseInverse().asDiagonal();
  baseline.q_w = q_w;
  baseline.r_diag = r_diag;

  const Eigen::Matrix4d closed = plant.A - baseline.L * plant.C0;
  if (Eigen::EigenSolver<Eigen::Matrix4d>(closed)
          .eigenvalues()
          .real()
          .maxCoeff() >= 0.0)
    throw NumericalFailure(
        "kalman_baseline: estimator closed loop is not Hurwitz");
  return baseline;
}

SimTrace simulate_kalman(const Plant& plant, const KalmanBaseline& baseline,
                         const RoadProfile& road, const SimConfig& cfg) {
  validate_config(cfg);
  if (cfg.mode == SimConfig::Mode::kModelConsistent)
    throw std::domain_error(
        "simulate_kalman: the baseline is defined for scenario mode only");
  const int n = step_count(cfg);
  const double dt = cfg.dt;
  NoiseStream noise(cfg.seed);
  const double w_scale = cfg.sigma_w / std::sqrt(dt);

  SimTrace trace;
  allocate_trace(trace, n);

  using State = Eigen::Matrix<double, 8, 1>;
  State z;
  z.head<4>() = cfg.x0.head<4>();
  z.tail<4>() = cfg.x0.head<4>();

  auto deriv = [&](const State& state, double s, double w) {
    const Vector3 y0 =
        plant.C0 * state.head<4>() + plant.D0 * w;
    State d;
    d.head<4>() = plant.A * state.head<4>() + plant.B_r * eval_road(road, s) +
                  plant.B_w * w;
    d.tail<4>() = plant.A * state.tail<4>() +
                  baseline.L * (y0 - plant.C0 * state.tail<4>());
    return d;
  };

  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const double w = w_scale * noise.next_normal();
    trace.t[k] = t;
    trace.x_a.row(k).head<4>() = z.head<4>();
    trace.x_a(k, 4) = eval_road(road, t);
    trace.x_hat.row(k).head<4>() = z.tail<4>();
    trace.x_hat(k, 4) = 0.0;  // no road estimate in the baseline
    trace.w[k] = w;
    trace.tau[k] = 0.0;
    trace.y.row(k).head<3>() =
        (plant.C0 * z.head<4>() + plant.D0 * w).transpose();
    trace.y(k, 3) = 0.0;  // no remote channel
    trace.e.row(k) = (z.head<4>() - z.tail<4>()).transpose();

    if (k + 1 == n) break;
    const State k1 = deriv(z, t, w);
    const State k2 = deriv(z + 0.5 * dt * k1, t + 0.5 * dt, w);
    const State k3 = deriv(z + 0.5 * dt * k2, t + 0.5 * dt, w);
    const State k4 = deriv(z + dt * k3, t + dt, w);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return trace;
}

Metrics metrics(const SimTrace& trace, double gamma_bound) {
  const Eigen::Index n = trace.rows();
  if (n < 1) throw std::domain_error("metrics: empty trace");

  Metrics out;
  out.gamma_bound = gamma_bound;
  for (int j = 0; j < 4; ++j) {
    out.rmse[j] = std::sqrt(trace.e.col(j).squaredNorm() /
                            static_cast<double>(n));
    out.peak[j] = trace.e.col(j).cwiseAbs().maxCoeff();
  }

  double e_energy = 0.0, w_energy = 0.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double dt = trace.t[k + 1] - trace.t[k];
    e_energy += 0.5 * dt *
                (trace.e.row(k).squaredNorm() +
                 trace.e.row(k + 1).squaredNorm());
    w_energy += 0.5 * dt *
                (trace.w[k] * trace.w[k] + trace.w[k + 1] * trace.w[k + 1]);
  }
  if (w_energy > 0.0) {
    out.energy_ratio = e_energy / w_energy;
    out.ratio_defined = true;
  }
  return out;
}

}  // namespace hifi
