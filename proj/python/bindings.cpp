#include "blockdyn/build_system.hpp"
#include "blockdyn/rigid_body.hpp"
#include "blockdyn/scenario.hpp"
#include "blockdyn/simulate.hpp"
#include "blockdyn/system.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>

namespace py = pybind11;
using namespace blockdyn;

namespace {

struct Model {
  ScenarioConfig config;
  System system;

  explicit Model(ScenarioConfig c) : config(std::move(c)), system(build_system(config)) {}
};

struct PyTrajectory {
  std::shared_ptr<const Model> model;
  Trajectory trajectory;

  Eigen::VectorXd times() const {
    Eigen::VectorXd t(trajectory.samples.size());
    for (std::size_t i = 0; i < trajectory.samples.size(); ++i) t(i) = trajectory.samples[i].t;
    return t;
  }
  Eigen::MatrixXd states() const {
    Eigen::MatrixXd out(trajectory.samples.size(), model->system.state_size());
    for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
      out.row(i) = trajectory.samples[i].x.transpose();
    }
    return out;
  }
  Eigen::MatrixXd dofs() const {
    Eigen::MatrixXd out(trajectory.samples.size(), model->system.dof_names().size());
    for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
      out.row(i) = model->system.dofs(trajectory.samples[i].x).transpose();
    }
    return out;
  }
  py::dict energy() const {
    const auto rows = energy_audit(model->system, trajectory);
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd kinetic(n), potential(n), dissipated(n), work(n), total(n), residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      kinetic(i) = rows[i].kinetic;
      potential(i) = rows[i].potential;
      dissipated(i) = rows[i].dissipated;
      work(i) = rows[i].work;
      total(i) = rows[i].total;
      residual(i) = rows[i].residual;
    }
    py::dict d;
    d["t"] = times();
    d["kinetic"] = kinetic;
    d["potential"] = potential;
    d["dissipated"] = dissipated;
    d["work"] = work;
    d["total"] = total;
    d["residual"] = residual;
    return d;
  }
};

EulerSequence sequence_arg(const std::string& s) { return parse_euler_sequence(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Block-diagram Newton-Euler multibody engine";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<AssemblyError>(m, "AssemblyError", PyExc_ValueError);
  py::register_exception<GimbalSingularity>(m, "GimbalSingularity", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ScenarioFileError& e) {
      PyErr_SetString(PyExc_FileNotFoundError, e.what());
    }
  });

  py::class_<PyTrajectory>(m, "Trajectory")
      .def_property_readonly("t", &PyTrajectory::times)
      .def_property_readonly("states", &PyTrajectory::states, "One row per kept sample.")
      .def_property_readonly("dofs", &PyTrajectory::dofs)
      .def_property_readonly("completed", [](const PyTrajectory& t) { return t.trajectory.completed; })
      .def_property_readonly("message", [](const PyTrajectory& t) { return t.trajectory.message; })
      .def("energy", &PyTrajectory::energy,
           "Energy audit columns: t, kinetic, potential, dissipated, work, total, residual.");

  py::class_<Model, std::shared_ptr<Model>>(m, "System")
      .def_static("from_file",
                  [](const std::string& path) { return std::make_shared<Model>(load_scenario(path)); })
      .def_static("from_text",
                  [](const std::string& text) { return std::make_shared<Model>(parse_scenario(text)); })
      .def_property_readonly("name", [](const Model& s) { return s.config.name; })
      .def_property_readonly("dof_names", [](const Model& s) { return s.system.dof_names(); })
      .def_property_readonly("state_size", [](const Model& s) { return s.system.state_size(); })
      .def_property_readonly("dt", [](const Model& s) { return s.config.integration.dt; })
      .def_property_readonly("t_final", [](const Model& s) { return s.config.integration.t_final; })
      .def("initial_state", [](const Model& s) { return s.system.initial_state(); })
      .def("derivative",
           [](const Model& s, double t, const Eigen::VectorXd& x) { return s.system.derivative(t, x); },
           py::arg("t"), py::arg("x"))
      .def("dofs", [](const Model& s, const Eigen::VectorXd& x) { return s.system.dofs(x); })
      .def("energy",
           [](const Model& s, double t, const Eigen::VectorXd& x) {
             const EnergyTerms e = s.system.energy(t, x);
             py::dict d;
             d["kinetic"] = e.kinetic;
             d["gravity"] = e.gravity;
             d["springs"] = e.springs;
             d["loads"] = e.loads;
             d["closures"] = e.closures;
             d["total"] = e.total();
             return d;
           },
           py::arg("t"), py::arg("x"))
      .def("momentum", [](const Model& s, const Eigen::VectorXd& x) { return s.system.momentum(x); },
           "Linear and angular momentum (about the inertial origin), inertial components.")
      .def("emit", [](const Model& s) { return emit_scenario(s.config); })
      .def(
          "simulate",
          [](const std::shared_ptr<Model>& s, std::optional<double> dt, std::optional<double> t_final,
             std::optional<std::string> scheme, int every) {
            IntegrationOptions o;
            o.dt = dt.value_or(s->config.integration.dt);
            o.t_final = t_final.value_or(s->config.integration.t_final);
            o.scheme = parse_scheme(scheme.value_or(s->config.integration.scheme));
            o.every = every;
            PyTrajectory out{s, {}};
            {
              py::gil_scoped_release release;
              out.trajectory = integrate(s->system, initial_sim_state(s->system), o);
            }
            return out;
          },
          py::arg("dt") = py::none(), py::arg("t_final") = py::none(),
          py::arg("scheme") = py::none(), py::arg("every") = 1,
          "Integrates from the scenario's initial state. A chart singularity ends the run early "
          "with completed == False and the samples reached so far.");

  m.def("emit_scenario", [](const std::string& text) { return emit_scenario(parse_scenario(text)); },
        "Canonical form of a scenario document.");
  m.def("euler_to_dcm",
        [](const Vec3& angles, const std::string& seq) {
          return euler_to_dcm({angles, sequence_arg(seq)}).matrix();
        },
        py::arg("angles"), py::arg("sequence") = "321", "Body-to-inertial DCM.");
  m.def("dcm_to_euler",
        [](const Mat3& dcm, const std::string& seq) {
          return dcm_to_euler(Dcm::from_matrix(dcm, 1e-9), sequence_arg(seq)).angles;
        },
        py::arg("dcm"), py::arg("sequence") = "321");
  m.def("gamma",
        [](const Vec3& angles, const std::string& seq) { return gamma({angles, sequence_arg(seq)}); },
        py::arg("angles"), py::arg("sequence") = "321", "Maps body angular velocity to Euler rates.");
  m.def("dynamic_model_at",
        [](double mass, const Mat3& inertia, const Vec3& com, const Vec3& point) {
          RigidBodyParams b;
          b.mass = mass;
          b.inertia = inertia;
          b.com = com;
          b.validate();
          return dynamic_model_at(b, point);
        },
        py::arg("mass"), py::arg("inertia"), py::arg("com"), py::arg("point"),
        "6x6 dynamic model at a body point.");
}
