#include "blockdyn/simulate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace blockdyn {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::kRk4 ? "rk4" : "semi-implicit-euler";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "rk4") return Scheme::kRk4;
  if (text == "semi-implicit-euler" || text == "semi_implicit_euler" ||
      text == "symplectic-euler") {
    return Scheme::kSemiImplicitEuler;
  }
  throw std::invalid_argument("unknown integration scheme '" + text +
                              "' (expected rk4 or semi-implicit-euler)");
}

SimState initial_sim_state(const System& system, double t0) {
  return {t0, system.initial_state(), 0.0, 0.0};
}

SimState step(const System& system, const SimState& s, double h, Scheme scheme) {
  SimState out;
  out.t = s.t + h;
  if (scheme == Scheme::kRk4) {
    const Evaluation k1 = system.evaluate(s.t, s.x, false);
    const Evaluation k2 = system.evaluate(s.t + 0.5 * h, s.x + 0.5 * h * k1.rate, false);
    const Evaluation k3 = system.evaluate(s.t + 0.5 * h, s.x + 0.5 * h * k2.rate, false);
    const Evaluation k4 = system.evaluate(s.t + h, s.x + h * k3.rate, false);
    out.x = s.x + (h / 6.0) * (k1.rate + 2.0 * k2.rate + 2.0 * k3.rate + k4.rate);
    out.dissipated = s.dissipated + (h / 6.0) * (k1.dissipation_power + 2.0 * k2.dissipation_power +
                                                 2.0 * k3.dissipation_power + k4.dissipation_power);
    out.work = s.work + (h / 6.0) * (k1.actuation_power + 2.0 * k2.actuation_power +
                                     2.0 * k3.actuation_power + k4.actuation_power);
    return out;
  }
  // Semi-implicit Euler: velocities first, then positions with the new velocities.
  const std::vector<bool>& vel = system.velocity_mask();
  const Evaluation e = system.evaluate(s.t, s.x, false);
  Eigen::VectorXd mid = s.x;
  for (int i = 0; i < mid.size(); ++i) {
    if (vel[i]) mid(i) += h * e.rate(i);
  }
  const Eigen::VectorXd r2 = system.derivative(s.t, mid);
  out.x = mid;
  for (int i = 0; i < mid.size(); ++i) {
    if (!vel[i]) out.x(i) += h * r2(i);
  }
  out.dissipated = s.dissipated + h * e.dissipation_power;
  out.work = s.work + h * e.actuation_power;
  return out;
}

Trajectory integrate(const System& system, const SimState& start, const IntegrationOptions& opts,
                     const std::function<void(const SimState&)>& on_sample) {
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) {
    throw std::invalid_argument("time step must be positive");
  }
  if (!(opts.t_final >= start.t)) {
    throw std::invalid_argument("final time precedes the start time");
  }
  if (opts.every < 1) throw std::invalid_argument("sample decimation must be >= 1");
  const double span = opts.t_final - start.t;
  const long long steps = static_cast<long long>(std::ceil(span / opts.dt - 1e-9));

  // Pitch entries of the base attitudes; a step may jump across the chart
  // singularity without ever landing close to it.
  std::vector<std::pair<int, int>> pitch;  // (block, state index)
  for (int b = 0; b < system.block_count(); ++b) {
    if (system.block(b).kind() == BlockKind::kBase) {
      pitch.emplace_back(b, system.state_offset(b) + 10);
    }
  }

  Trajectory traj;
  auto keep = [&](const SimState& s) {
    traj.samples.push_back(s);
    if (on_sample) on_sample(s);
  };
  keep(start);
  SimState s = start;
  for (long long k = 1; k <= steps; ++k) {
    const double t_next = k == steps ? opts.t_final : start.t + static_cast<double>(k) * opts.dt;
    try {
      SimState next = step(system, s, t_next - s.t, opts.scheme);
      next.t = t_next;
      if (!next.x.allFinite()) throw std::runtime_error("state became non-finite");
      for (const auto& [b, i] : pitch) {
        if (std::cos(s.x(i)) * std::cos(next.x(i)) <= 0.0) {
          throw GimbalSingularity("Euler pitch of block '" + system.block(b).name() +
                                  "' crossed the chart singularity");
        }
      }
      s = std::move(next);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "halted at t = " << s.t << ": " << e.what();
      traj.completed = false;
      traj.message = msg.str();
      traj.halted_at = s;
      return traj;
    }
    if (k % opts.every == 0 || k == steps) keep(s);
  }
  return traj;
}

std::vector<EnergyRow> energy_audit(const System& system, const Trajectory& trajectory) {
  std::vector<EnergyRow> rows;
  rows.reserve(trajectory.samples.size());
  double e0 = 0.0;
  for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
    const SimState& s = trajectory.samples[i];
    const EnergyTerms e = system.energy(s.t, s.x);
    EnergyRow r;
    r.t = s.t;
    r.kinetic = e.kinetic;
    r.potential = e.potential();
    r.dissipated = s.dissipated;
    r.work = s.work;
    r.total = e.total();
    if (i == 0) e0 = r.total;
    r.residual = r.total - e0 + (s.dissipated - trajectory.samples.front().dissipated) -
                 (s.work - trajectory.samples.front().work);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace blockdyn
