#include "kuq/sysgen.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace kuq {

double SwingSystem::equilibrium_angle() const {
  if (!(inertia_h > 0.0) || !(omega_ref > 0.0) || !(p_max > 0.0)) {
    throw InvalidParameter(
        "swing system: inertia_h, omega_ref and p_max must be positive");
  }
  if (!(p_mech >= 0.0) || !(p_mech < p_max)) {
    throw InvalidParameter(
        "swing system: need 0 <= p_mech < p_max for a stable operating "
        "point, got p_mech=" +
        std::to_string(p_mech) + ", p_max=" + std::to_string(p_max));
  }
  return std::asin(p_mech / p_max);
}

double swing_energy(const SwingSystem& system, double delta, double domega) {
  return system.inertia_h / system.omega_ref * domega * domega -
         system.p_mech * delta - system.p_max * std::cos(delta);
}

TimeSeries rk4_integrate(const VectorField& field, const Vector& x0,
                         double step, double duration,
                         std::vector<std::string> state_names) {
  if (!(step > 0.0)) {
    throw InvalidParameter("rk4_integrate: step must be positive, got " +
                           std::to_string(step));
  }
  if (!(duration >= step)) {
    throw InvalidParameter(
        "rk4_integrate: duration must cover at least one step, got " +
        std::to_string(duration));
  }
  if (x0.size() < 1) {
    throw InvalidParameter("rk4_integrate: empty initial state");
  }
  if (static_cast<Eigen::Index>(state_names.size()) != x0.size()) {
    throw ShapeError("rk4_integrate: " + std::to_string(state_names.size()) +
                     " state names for " + std::to_string(x0.size()) +
                     " states");
  }

  const auto steps = static_cast<Eigen::Index>(duration / step + 1e-9);
  const Eigen::Index n = x0.size();
  Matrix data(steps + 1, n);
  data.row(0) = x0.transpose();

  Vector state = x0;
  Vector k1(n), k2(n), k3(n), k4(n), scratch(n);
  for (Eigen::Index i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * step;
    field(t, state, k1);
    scratch = state + 0.5 * step * k1;
    field(t + 0.5 * step, scratch, k2);
    scratch = state + 0.5 * step * k2;
    field(t + 0.5 * step, scratch, k3);
    scratch = state + step * k3;
    field(t + step, scratch, k4);
    state += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!state.allFinite()) {
      throw DivergenceError("rk4_integrate: state diverged at t=" +
                            std::to_string(t + step));
    }
    data.row(i + 1) = state.transpose();
  }

  return make_time_series(step, std::move(state_names), std::move(data));
}

TimeSeries swing_trajectory(const SwingSystem& system, const SimConfig& sim,
                            bool derived_outputs) {
  Vector x0(2);
  if (sim.initial_state.empty()) {
    x0 << system.equilibrium_angle(), 0.0;
  } else if (sim.initial_state.size() == 2) {
    system.equilibrium_angle();  // validates the parameter set
    x0 << sim.initial_state[0], sim.initial_state[1];
  } else {
    throw InvalidParameter("swing_trajectory: initial state must be "
                           "(delta, domega), got " +
                           std::to_string(sim.initial_state.size()) +
                           " values");
  }

  const double accel_gain = system.omega_ref / (2.0 * system.inertia_h);
  const VectorField field = [&system, accel_gain](double, const Vector& s,
                                                  Vector& d) {
    d(0) = s(1);
    d(1) = accel_gain * (system.p_mech - system.p_max * std::sin(s(0)) -
                         system.damping * s(1));
  };

  TimeSeries base =
      rk4_integrate(field, x0, sim.step, sim.duration, {"delta", "domega"});
  if (!derived_outputs) {
    return base;
  }

  Matrix extended(base.data.rows(), 4);
  extended.leftCols(2) = base.data;
  extended.col(2) = base.data.col(0).array().sin();
  extended.col(3) = base.data.col(0).array().cos();
  return make_time_series(
      base.sample_period,
      {"delta", "domega", "sin_delta", "cos_delta"}, std::move(extended));
}

TimeSeries add_measurement_noise(const TimeSeries& series,
                                 const NoiseModel& noise, RngHandle handle) {
  const Eigen::Index n = series.states();
  if (static_cast<Eigen::Index>(noise.variances.size()) != n) {
    throw ShapeError("add_measurement_noise: noise model has " +
                     std::to_string(noise.variances.size()) +
                     " variances for " + std::to_string(n) + " states");
  }
  std::vector<double> sds(noise.variances.size());
  for (std::size_t j = 0; j < noise.variances.size(); ++j) {
    if (noise.variances[j] < 0.0) {
      throw InvalidParameter(
          "add_measurement_noise: negative variance for state " +
          std::to_string(j));
    }
    sds[j] = std::sqrt(noise.variances[j]);
  }

  Rng rng(handle);
  TimeSeries out = series;
  for (Eigen::Index i = 0; i < out.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.data(i, j) += sds[static_cast<std::size_t>(j)] * rng.next_gauss();
    }
  }
  return out;
}

}  // namespace kuq
