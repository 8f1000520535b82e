#include "hifi/model.hpp"

#include <cmath>
#include <stdexcept>

namespace hifi {

Plant build_plant(const SuspensionParams& p) {
  if (!(p.m_s > 0.0) || !(p.m_us > 0.0))
    throw std::domain_error("build_plant: masses must be positive");
  if (!(p.k_s > 0.0) || !(p.k_us > 0.0))
    throw std::domain_error("build_plant: stiffnesses must be positive");
  if (!(p.c_s >= 0.0))
    throw std::domain_error("build_plant: damper rate must be non-negative");
  if (!(p.alpha >= 0.0))
    throw std::domain_error("build_plant: noise coupling must be non-negative");

  Plant plant;
  plant.A.setZero();
  // Tire deflection integrates the velocity difference to the road.
  plant.A(0, 1) = 1.0;
  // Unsprung mass: tire force, damper force, suspension force.
  plant.A(1, 0) = -p.k_us / p.m_us;
  plant.A(1, 1) = -p.c_s / p.m_us;
  plant.A(1, 2) = p.k_s / p.m_us;
  plant.A(1, 3) = p.c_s / p.m_us;
  // Suspension stroke integrates the relative velocity.
  plant.A(2, 1) = -1.0;
  plant.A(2, 3) = 1.0;
  // Sprung mass: suspension force and damper force.
  plant.A(3, 1) = p.c_s / p.m_s;
  plant.A(3, 2) = -p.k_s / p.m_s;
  plant.A(3, 3) = -p.c_s / p.m_s;

  plant.B << 0.0, 1.0 / p.m_us, 0.0, -1.0 / p.m_s;
  plant.B_r << -1.0, 0.0, 0.0, 0.0;
  plant.B_w << -p.alpha, 0.0, 0.0, 0.0;

  // The three on-board sensors read x2, x3, x4.
  plant.C0.setZero();
  plant.C0(0, 1) = 1.0;
  plant.C0(1, 2) = 1.0;
  plant.C0(2, 3) = 1.0;
  plant.D0.setConstant(0.01);
  return plant;
}

AugmentedDelaySystem augment(const Plant& plant, double d_r, double d_1,
                             double tau_min, double tau_max,
                             double road_decay) {
  if (!(tau_min >= 0.0) || !(tau_max >= tau_min))
    throw std::domain_error("augment: need 0 <= tau_min <= tau_max");
  if (!(d_r >= 0.0))
    throw std::domain_error("augment: d_r must be non-negative");
  if (!(road_decay >= 0.0))
    throw std::domain_error("augment: road_decay must be non-negative");

  AugmentedDelaySystem sys;
  sys.A_a.setZero();
  sys.A_a.topLeftCorner<4, 4>() = plant.A;
  sys.A_a.topRightCorner<4, 1>() = plant.B_r;
  sys.A_a(4, 4) = -road_decay;

  sys.B_a.head<4>() = plant.B_w;
  sys.B_a(4) = d_r;

  // Instantaneous channels: the on-board sensors see only plant states.
  sys.C_a0.setZero();
  sys.C_a0.topLeftCorner<3, 4>() = plant.C0;

  // Delayed channel: the remote source reports the road state x5.
  sys.C_a1.setZero();
  sys.C_a1(3, 4) = 1.0;

  sys.D_a.head<3>() = plant.D0;
  sys.D_a(3) = d_1;

  sys.E_a.setZero();
  sys.E_a.topLeftCorner<4, 4>().setIdentity();

  sys.D_r = d_r;
  sys.D_1 = d_1;
  sys.tau_min = tau_min;
  sys.tau_max = tau_max;
  sys.road_decay = road_decay;
  return sys;
}

double eval_road(const RoadProfile& profile, double t) {
  if (t < 0.0) return 0.0;
  for (const RoadSegment& seg : profile.segments) {
    if (t >= seg.t_start && t < seg.t_end) {
      if (seg.waveform == RoadSegment::Waveform::kZero) return 0.0;
      return seg.amplitude * std::sin(seg.omega * t + seg.phase);
    }
  }
  return 0.0;
}

RoadProfile demo_road() {
  const double pi = 3.14159265358979323846;
  RoadProfile road;
  RoadSegment first;
  first.t_start = 1.0;
  first.t_end = 3.0;
  first.amplitude = 0.15;
  first.omega = pi;
  first.phase = -pi;  // sin(pi (t-1))
  RoadSegment second;
  second.t_start = 4.0;
  second.t_end = 8.0;
  second.amplitude = 0.2;
  second.omega = pi / 2.0;
  second.phase = 0.0;
  road.segments = {first, second};
  return road;
}

}  // namespace hifi
