#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hifi {

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;
using Vector3 = Eigen::Vector3d;
using Matrix5 = Eigen::Matrix<double, 5, 5>;
using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix34 = Eigen::Matrix<double, 3, 4>;
using Matrix45 = Eigen::Matrix<double, 4, 5>;
using Matrix54 = Eigen::Matrix<double, 5, 4>;
using Matrix10 = Eigen::Matrix<double, 10, 10>;

/// Physical parameters of a semi-active quarter-car suspension.
struct SuspensionParams {
  double m_s;   ///< sprung mass [kg]
  double m_us;  ///< unsprung mass [kg]
  double k_s;   ///< suspension stiffness [N/m]
  double k_us;  ///< tire stiffness [N/m]
  double c_s;   ///< nominal damper rate [N s/m]
  double alpha; ///< road-noise coupling into tire deflection
};

/// Four-state vertical dynamics driven by damper force, road velocity,
/// and a scalar wide-band disturbance:
///
///   x1 tire deflection, x2 unsprung-mass velocity,
///   x3 suspension stroke, x4 sprung-mass velocity.
///
///   dx/dt = A x + B u + B_r rdot + B_w w,   y0 = C0 x + D0 w.
struct Plant {
  Matrix4 A;
  Vector4 B;    ///< damper force input
  Vector4 B_r;  ///< road vertical velocity input
  Vector4 B_w;  ///< disturbance input
  Matrix34 C0;  ///< on-board measurements (x2, x3, x4)
  Vector3 D0;   ///< measurement noise coupling per channel
};

/// Plant augmented with a first-order road-velocity state x5 = rdot so
/// that the delayed remote channel y1(t) = x5(t - tau) + D_1 w becomes a
/// delayed *state* measurement:
///
///   dxa/dt = A_a xa + B_a w,
///   ya(t)  = C_a0 xa(t) + C_a1 xa(t - tau) + D_a w(t),
///   z      = E_a xa  (the four plant states to be estimated).
///
/// road_decay >= 0 damps the road state (dx5/dt = -road_decay x5 + D_r w);
/// zero keeps a pure integrator driven by noise.
struct AugmentedDelaySystem {
  Matrix5 A_a;
  Vector5 B_a;
  Matrix45 C_a0;
  Matrix45 C_a1;
  Vector4 D_a;
  Matrix45 E_a;
  double D_r;         ///< disturbance gain into the road state
  double D_1;         ///< noise coupling of the remote channel
  double tau_min;     ///< smallest admissible delay [s]
  double tau_max;     ///< largest admissible delay [s]
  double road_decay;  ///< road-state decay rate [1/s]
};

/// Full-order estimator driven by the stacked measurement ya:
///   dxh/dt = K_A xh + K_B ya,   zh = K_C xh.
struct FilterGains {
  Matrix5 K_A;
  Matrix54 K_B;
  Matrix45 K_C;
};

/// Piecewise road-velocity waveform; zero outside all segments.
struct RoadSegment {
  enum class Waveform { kZero, kSine };
  Waveform waveform = Waveform::kSine;
  double t_start = 0.0;
  double t_end = 0.0;
  double amplitude = 0.0;  ///< peak velocity [m/s]
  double omega = 0.0;      ///< angular frequency [rad/s]
  double phase = 0.0;      ///< radians, value = amplitude*sin(omega*t+phase)
};

struct RoadProfile {
  std::vector<RoadSegment> segments;  ///< sorted, non-overlapping in time
};

/// Builds the quarter-car state matrices from physical parameters.
/// Throws std::domain_error for non-positive masses or stiffnesses or a
/// negative damper rate / noise coupling.
Plant build_plant(const SuspensionParams& params);

/// Attaches the road-velocity state and the delayed remote channel.
/// Throws std::domain_error unless 0 <= tau_min <= tau_max and
/// road_decay >= 0.
AugmentedDelaySystem augment(const Plant& plant, double d_r, double d_1,
                             double tau_min, double tau_max,
                             double road_decay = 0.0);

/// Road velocity at time t; zero before all segments, between them, and
/// after them (t < 0 reads as zero so delayed lookups are well defined).
double eval_road(const RoadProfile& profile, double t);

/// Two-burst road-velocity waveform used by the bundled simulation and
/// comparison commands: 0.15 sin(pi (t-1)) on [1,3] and
/// 0.2 sin(pi t / 2) on [4,8], zero elsewhere.
RoadProfile demo_road();

}  // namespace hifi
