#pragma once

// Fixed-step integration of an assembled system and the energy ledger.

#include "blockdyn/system.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace blockdyn {

enum class Scheme { kRk4, kSemiImplicitEuler };

std::string to_string(Scheme scheme);
/// "rk4" or "semi-implicit-euler"; throws std::invalid_argument otherwise.
Scheme parse_scheme(const std::string& text);

/// Slow state plus the integrated dissipated energy and external work.
struct SimState {
  double t = 0.0;
  Eigen::VectorXd x;
  double dissipated = 0.0;
  double work = 0.0;
};

struct IntegrationOptions {
  double dt = 1e-3;
  double t_final = 1.0;
  Scheme scheme = Scheme::kRk4;
  int every = 1;  // keep every n-th step (the last step is always kept)
};

struct Trajectory {
  std::vector<SimState> samples;
  bool completed = true;
  /// When the run halted: the reason, and the last state reached.
  std::string message;
  SimState halted_at;
};

SimState initial_sim_state(const System& system, double t0 = 0.0);

/// Advances one step of size h.
SimState step(const System& system, const SimState& s, double h, Scheme scheme);

/// Integrates from `start` to opts.t_final. Chart singularities and singular
/// fast systems stop the run; the samples gathered so far are returned.
/// `on_sample` is called for every kept sample as it is produced.
Trajectory integrate(const System& system, const SimState& start, const IntegrationOptions& opts,
                     const std::function<void(const SimState&)>& on_sample = {});

struct EnergyRow {
  double t = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double dissipated = 0.0;
  double work = 0.0;
  double total = 0.0;     // kinetic + potential
  double residual = 0.0;  // total - total(0) + dissipated - work
};

std::vector<EnergyRow> energy_audit(const System& system, const Trajectory& trajectory);

}  // namespace blockdyn
