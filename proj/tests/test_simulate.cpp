#include "blockdyn/build_system.hpp"
#include "blockdyn/simulate.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blockdyn;

namespace {

System assemble(const std::string& text) { return System(build_system(parse_scenario(text))); }

}  // namespace

TEST(Integrate, SampleCount) {
  const System sys = assemble(fixtures::point_pendulum(30));
  const Trajectory tr = integrate(sys, initial_sim_state(sys), {1e-3, 1.0, Scheme::kRk4, 1});
  ASSERT_TRUE(tr.completed);
  EXPECT_EQ(tr.samples.size(), 1001u);
  EXPECT_DOUBLE_EQ(tr.samples.back().t, 1.0);
  EXPECT_NEAR(tr.samples[500].t, 0.5, 1e-15);
}

TEST(Integrate, Decimation) {
  const System sys = assemble(fixtures::point_pendulum(30));
  int calls = 0;
  const Trajectory tr = integrate(sys, initial_sim_state(sys), {1e-3, 1.0, Scheme::kRk4, 10},
                                  [&](const SimState&) { ++calls; });
  EXPECT_EQ(tr.samples.size(), 101u);
  EXPECT_EQ(calls, 101);
  // A final partial step is still kept.
  const Trajectory odd = integrate(sys, initial_sim_state(sys), {1e-3, 1.0005, Scheme::kRk4, 10});
  EXPECT_DOUBLE_EQ(odd.samples.back().t, 1.0005);
}

TEST(Integrate, BadOptions) {
  const System sys = assemble(fixtures::point_pendulum(30));
  EXPECT_THROW(integrate(sys, initial_sim_state(sys), {0.0, 1.0, Scheme::kRk4, 1}),
               std::invalid_argument);
  EXPECT_THROW(integrate(sys, initial_sim_state(sys), {1e-3, 1.0, Scheme::kRk4, 0}),
               std::invalid_argument);
  EXPECT_THROW(parse_scheme("euler"), std::invalid_argument);
  EXPECT_EQ(parse_scheme("semi-implicit-euler"), Scheme::kSemiImplicitEuler);
  EXPECT_EQ(to_string(Scheme::kRk4), "rk4");
}

TEST(Integrate, ChartSingularityHalts) {
  std::string text = fixtures::tumbling_body("[0, 2, 0]");
  text += "      attitude: [0, 1.4, 0]\n";
  const System sys = assemble(text);
  const Trajectory tr = integrate(sys, initial_sim_state(sys), {1e-3, 1.0, Scheme::kRk4, 1});
  EXPECT_FALSE(tr.completed);
  EXPECT_NE(tr.message.find("halted at t = "), std::string::npos) << tr.message;
  EXPECT_GT(tr.halted_at.t, 0.05);
  EXPECT_LT(tr.halted_at.t, 0.1);
  EXPECT_EQ(tr.halted_at.x.size(), 12);
  EXPECT_DOUBLE_EQ(tr.samples.back().t, tr.halted_at.t);
}

TEST(Energy, ConservativeResidualIsSmall) {
  const System sys = assemble(fixtures::double_pendulum(40, -20));
  const Trajectory tr = integrate(sys, initial_sim_state(sys), {1e-3, 3.0, Scheme::kRk4, 10});
  const auto rows = energy_audit(sys, tr);
  const double e0 = std::abs(rows.front().total);
  for (const EnergyRow& r : rows) {
    EXPECT_LE(std::abs(r.residual), 1e-8 * e0) << "t = " << r.t;
    EXPECT_EQ(r.dissipated, 0.0);
  }
}

TEST(Energy, HalvingStepReducesResidual) {
  const System sys = assemble(fixtures::double_pendulum(60, -40));
  auto worst = [&](double dt) {
    const Trajectory tr = integrate(sys, initial_sim_state(sys), {dt, 2.0, Scheme::kRk4, 1});
    double w = 0;
    for (const EnergyRow& r : energy_audit(sys, tr)) w = std::max(w, std::abs(r.residual));
    return w;
  };
  const double ratio = worst(4e-3) / worst(2e-3);
  EXPECT_GT(ratio, 8.0);
}

TEST(Energy, DampedIsNonIncreasing) {
  const System sys = assemble(fixtures::double_pendulum(120, -60, 0.4));
  const Trajectory tr = integrate(sys, initial_sim_state(sys), {1e-3, 3.0, Scheme::kRk4, 1});
  const auto rows = energy_audit(sys, tr);
  const double e0 = std::abs(rows.front().total);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].total, rows[i - 1].total + 1e-10 * e0) << "t = " << rows[i].t;
    EXPECT_LE(std::abs(rows[i].residual), 1e-7 * e0);
  }
  EXPECT_GT(rows.back().dissipated, 0.0);
}

TEST(Energy, DriveSpringPotential) {
  const System sys = assemble(fixtures::spring_slider(4, 1, 0.5));
  const EnergyTerms e = sys.energy(0.0, sys.initial_state());
  EXPECT_NEAR(e.springs, 0.5, 1e-15);
  EXPECT_EQ(e.kinetic, 0.0);
}

TEST(SemiImplicitEuler, OscillatorStaysBounded) {
  const System sys = assemble(fixtures::spring_slider(4, 1, 0.5));
  const Trajectory tr =
      integrate(sys, initial_sim_state(sys), {1e-3, 20.0, Scheme::kSemiImplicitEuler, 100});
  ASSERT_TRUE(tr.completed);
  for (const EnergyRow& r : energy_audit(sys, tr)) {
    EXPECT_LE(std::abs(r.total - 0.5), 2e-3 * 0.5);
  }
}
