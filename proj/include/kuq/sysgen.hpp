#pragma once

#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kuq/ingest.hpp"
#include "kuq/numkernel.hpp"
#include "kuq/rng.hpp"

namespace kuq {

// Single-machine electromechanical swing model, per-unit:
//   d(delta)/dt  = domega
//   d(domega)/dt = (omega_ref / (2 inertia_h))
//                  * (p_mech - p_max sin(delta) - damping * domega)
struct SwingSystem {
  double inertia_h = 3.5;                               // s
  double omega_ref = 2.0 * std::numbers::pi * 60.0;     // rad/s
  double p_mech = 0.8;                // pu
  double p_max = 1.2;                 // pu
  double damping = 0.0;               // pu torque per rad/s deviation

  // Stable operating point: asin(p_mech / p_max). Requires p_mech < p_max.
  double equilibrium_angle() const;
};

// Energy-like function conserved along undamped swing trajectories:
// (inertia_h / omega_ref) domega^2 - p_mech delta - p_max cos(delta).
double swing_energy(const SwingSystem& system, double delta, double domega);

struct SimConfig {
  double step = 0.01;      // s
  double duration = 20.0;  // s
  // Initial (delta, domega); empty means the equilibrium point.
  std::vector<double> initial_state;
};

using VectorField =
    std::function<void(double t, const Vector& state, Vector& deriv)>;

// Classical fixed-step fourth-order Runge-Kutta. Produces
// floor(duration / step) + 1 uniformly spaced rows, the first one being the
// initial state. Throws DivergenceError if the state leaves the finite
// range mid-run.
TimeSeries rk4_integrate(const VectorField& field, const Vector& x0,
                         double step, double duration,
                         std::vector<std::string> state_names);

// Swing trajectory; with derived_outputs the observables sin(delta) and
// cos(delta) are appended, giving states
// (delta, domega, sin_delta, cos_delta).
TimeSeries swing_trajectory(const SwingSystem& system, const SimConfig& sim,
                            bool derived_outputs = true);

// Adds independent N(0, sigma_j^2) noise to every sample of state j
// (row-major draw order). Zero variances leave the column untouched.
TimeSeries add_measurement_noise(const TimeSeries& series,
                                 const NoiseModel& noise, RngHandle handle);

}  // namespace kuq
