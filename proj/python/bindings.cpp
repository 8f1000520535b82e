// Python bindings for the core operations: model construction, filter
// synthesis, certification, and simulation.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hifi/errors.hpp"
#include "hifi/model.hpp"
#include "hifi/simulator.hpp"
#include "hifi/synthesis.hpp"

namespace py = pybind11;
using namespace hifi;

PYBIND11_MODULE(hifi, m) {
  m.doc() =
      "H-infinity filtering for linear systems with a delayed remote "
      "measurement, instantiated on a quarter-car suspension";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SynthesisInfeasible>(m, "SynthesisInfeasible",
                                              PyExc_RuntimeError);
  py::register_exception<CertificationFailure>(m, "CertificationFailure",
                                               PyExc_RuntimeError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure",
                                           PyExc_RuntimeError);

  py::class_<SuspensionParams>(m, "SuspensionParams")
      .def(py::init([](double m_s, double m_us, double k_s, double k_us,
                       double c_s, double alpha) {
             return SuspensionParams{m_s, m_us, k_s, k_us, c_s, alpha};
           }),
           py::arg("m_s"), py::arg("m_us"), py::arg("k_s"), py::arg("k_us"),
           py::arg("c_s"), py::arg("alpha"))
      .def_readwrite("m_s", &SuspensionParams::m_s)
      .def_readwrite("m_us", &SuspensionParams::m_us)
      .def_readwrite("k_s", &SuspensionParams::k_s)
      .def_readwrite("k_us", &SuspensionParams::k_us)
      .def_readwrite("c_s", &SuspensionParams::c_s)
      .def_readwrite("alpha", &SuspensionParams::alpha);

  py::class_<Plant>(m, "Plant")
      .def_readwrite("A", &Plant::A)
      .def_readwrite("B", &Plant::B)
      .def_readwrite("B_r", &Plant::B_r)
      .def_readwrite("B_w", &Plant::B_w)
      .def_readwrite("C0", &Plant::C0)
      .def_readwrite("D0", &Plant::D0);

  py::class_<AugmentedDelaySystem>(m, "AugmentedDelaySystem")
      .def_readwrite("A_a", &AugmentedDelaySystem::A_a)
      .def_readwrite("B_a", &AugmentedDelaySystem::B_a)
      .def_readwrite("C_a0", &AugmentedDelaySystem::C_a0)
      .def_readwrite("C_a1", &AugmentedDelaySystem::C_a1)
      .def_readwrite("D_a", &AugmentedDelaySystem::D_a)
      .def_readwrite("E_a", &AugmentedDelaySystem::E_a)
      .def_readwrite("D_r", &AugmentedDelaySystem::D_r)
      .def_readwrite("D_1", &AugmentedDelaySystem::D_1)
      .def_readwrite("tau_min", &AugmentedDelaySystem::tau_min)
      .def_readwrite("tau_max", &AugmentedDelaySystem::tau_max)
      .def_readwrite("road_decay", &AugmentedDelaySystem::road_decay);

  py::class_<FilterGains>(m, "FilterGains")
      .def(py::init<>())
      .def_readwrite("K_A", &FilterGains::K_A)
      .def_readwrite("K_B", &FilterGains::K_B)
      .def_readwrite("K_C", &FilterGains::K_C);

  py::class_<RoadProfile>(m, "RoadProfile").def(py::init<>());

  py::class_<DelayProfile> delay_profile(m, "DelayProfile");
  delay_profile.def(py::init<>())
      .def_static("constant", &DelayProfile::constant, py::arg("tau"))
      .def_static("sinusoid", &DelayProfile::sinusoid, py::arg("mean"),
                  py::arg("amplitude"), py::arg("period"))
      .def_readwrite("tau", &DelayProfile::tau)
      .def_readwrite("mean", &DelayProfile::mean)
      .def_readwrite("amplitude", &DelayProfile::amplitude)
      .def_readwrite("period", &DelayProfile::period)
      .def_readwrite("seed", &DelayProfile::seed)
      .def_readwrite("step_std", &DelayProfile::step_std);

  py::class_<SimConfig> sim_config(m, "SimConfig");
  py::enum_<SimConfig::Mode>(sim_config, "Mode")
      .value("model_consistent", SimConfig::Mode::kModelConsistent)
      .value("scenario", SimConfig::Mode::kScenario);
  sim_config.def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("horizon", &SimConfig::horizon)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("sigma_w", &SimConfig::sigma_w)
      .def_readwrite("mode", &SimConfig::mode)
      .def_readwrite("x0", &SimConfig::x0);

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("t", &SimTrace::t)
      .def_readonly("x_a", &SimTrace::x_a)
      .def_readonly("x_hat", &SimTrace::x_hat)
      .def_readonly("y", &SimTrace::y)
      .def_readonly("e", &SimTrace::e)
      .def_readonly("w", &SimTrace::w)
      .def_readonly("tau", &SimTrace::tau)
      .def("rows", &SimTrace::rows);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("rmse", &Metrics::rmse)
      .def_readonly("peak", &Metrics::peak)
      .def_readonly("energy_ratio", &Metrics::energy_ratio)
      .def_readonly("ratio_defined", &Metrics::ratio_defined)
      .def_readonly("gamma_bound", &Metrics::gamma_bound);

  py::class_<KalmanBaseline>(m, "KalmanBaseline")
      .def_readonly("L", &KalmanBaseline::L)
      .def_readonly("P_care", &KalmanBaseline::P_care)
      .def_readonly("q_w", &KalmanBaseline::q_w)
      .def_readonly("r_diag", &KalmanBaseline::r_diag);

  py::class_<SynthesisResult>(m, "SynthesisResult")
      .def_readonly("gains", &SynthesisResult::gains)
      .def_readonly("X", &SynthesisResult::X)
      .def_readonly("Y", &SynthesisResult::Y)
      .def_readonly("P", &SynthesisResult::P)
      .def_readonly("Q1", &SynthesisResult::Q1)
      .def_readonly("Q2", &SynthesisResult::Q2)
      .def_readonly("gamma", &SynthesisResult::gamma)
      .def_readonly("tau_max", &SynthesisResult::tau_max)
      .def_readonly("q1_selected", &SynthesisResult::q1_selected)
      .def_readonly("margin", &SynthesisResult::margin)
      .def_readonly("iterations", &SynthesisResult::iterations);

  m.def("build_plant", &build_plant, py::arg("params"),
        "Quarter-car state matrices from physical parameters");
  m.def("augment", &augment, py::arg("plant"), py::arg("d_r"), py::arg("d_1"),
        py::arg("tau_min"), py::arg("tau_max"), py::arg("road_decay") = 0.0,
        "Attach the road-velocity state and the delayed remote channel");
  m.def("eval_road", &eval_road, py::arg("profile"), py::arg("t"),
        "Road velocity at time t");
  m.def("demo_road", &demo_road,
        "Two-burst road waveform used by the bundled commands");
  m.def(
      "synthesize",
      [](const AugmentedDelaySystem& sys, double gamma) {
        return synthesize(sys, gamma);
      },
      py::arg("sys"), py::arg("gamma"),
      "Design and re-certify filter gains for the attenuation level");
  m.def(
      "minimize_gamma",
      [](const AugmentedDelaySystem& sys, double tau_max) {
        return minimize_gamma(sys, tau_max);
      },
      py::arg("sys"), py::arg("tau_max"),
      "Bisect for the smallest certified attenuation level");
  m.def("simulate", &simulate, py::arg("sys"), py::arg("gains"),
        py::arg("road"), py::arg("delay"), py::arg("cfg"),
        "Integrate the plant and filter; deterministic for fixed inputs");
  m.def("kalman_baseline", &kalman_baseline, py::arg("plant"), py::arg("q_w"),
        py::arg("r_diag"), "Steady-state Kalman gain for the on-board channel");
  m.def("simulate_kalman", &simulate_kalman, py::arg("plant"),
        py::arg("baseline"), py::arg("road"), py::arg("cfg"),
        "Companion observer run with the same noise convention");
  m.def("metrics", &metrics, py::arg("trace"),
        py::arg("gamma_bound") = std::numeric_limits<double>::quiet_NaN(),
        "Per-component RMSE/peaks and the error/disturbance energy ratio");
}
