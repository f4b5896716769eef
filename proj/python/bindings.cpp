#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ewod/config.hpp"
#include "ewod/diagnostics.hpp"
#include "ewod/runner.hpp"
#include "ewod/vtk_io.hpp"

namespace py = pybind11;
using namespace ewod;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  return {a.data(), a.data() + a.size()};
}

/// Owns the discretization plus the current state; the thin driver the
/// python side works with.
struct Simulation {
  RunConfig cfg;
  std::unique_ptr<Simulator> sim;
  State state;
  StepReport last_report;

  explicit Simulation(const RunConfig& c) : cfg(c) {
    sim = build_simulator(cfg);
    state = sim->init_state(cfg.droplets);
  }

  void step(int n) {
    for (int k = 0; k < n; ++k) {
      StepReport rep;
      State s1 = sim->step(state, &rep);
      last_report = rep;
      if (!rep.ok) throw std::runtime_error("solver failure in step: " + rep.failed_step);
      state = std::move(s1);
    }
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diffuse-interface electrowetting-on-dielectric solver core";

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("__repr__", [](const Vec2& v) {
        return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
      });

  py::enum_<Plate>(m, "Plate").value("Bottom", Plate::Bottom).value("Top", Plate::Top);

  py::class_<ElectrodeSegment>(m, "ElectrodeSegment")
      .def(py::init<>())
      .def_readwrite("plate", &ElectrodeSegment::plate)
      .def_readwrite("x0", &ElectrodeSegment::x0)
      .def_readwrite("x1", &ElectrodeSegment::x1)
      .def_readwrite("voltage", &ElectrodeSegment::voltage);

  py::class_<ChannelGeometry>(m, "ChannelGeometry")
      .def(py::init<>())
      .def_readwrite("x_min", &ChannelGeometry::x_min)
      .def_readwrite("x_max", &ChannelGeometry::x_max)
      .def_readwrite("y_fluid_min", &ChannelGeometry::y_fluid_min)
      .def_readwrite("y_fluid_max", &ChannelGeometry::y_fluid_max)
      .def_readwrite("plate_thickness", &ChannelGeometry::plate_thickness)
      .def_readwrite("electrodes", &ChannelGeometry::electrodes)
      .def("validate", &ChannelGeometry::validate);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n_cells", &Mesh::n_cells)
      .def_property_readonly("n_nodes", &Mesh::n_nodes)
      .def_property_readonly("fluid_area", &Mesh::fluid_area)
      .def_property_readonly("total_area", &Mesh::total_area)
      .def_property_readonly("nodes",
                             [](const Mesh& mm) {
                               py::array_t<double> a({mm.n_nodes(), 2});
                               auto r = a.mutable_unchecked<2>();
                               for (int i = 0; i < mm.n_nodes(); ++i) {
                                 r(i, 0) = mm.nodes[i].x;
                                 r(i, 1) = mm.nodes[i].y;
                               }
                               return a;
                             })
      .def_property_readonly("cells", [](const Mesh& mm) {
        py::array_t<int> a({mm.n_cells(), 4});
        auto r = a.mutable_unchecked<2>();
        for (int i = 0; i < mm.n_cells(); ++i)
          for (int k = 0; k < 4; ++k) r(i, k) = mm.cells[i][k];
        return a;
      });

  m.def("build_channel_mesh", &build_channel_mesh, py::arg("geometry"), py::arg("nx"),
        py::arg("ny_fluid"), py::arg("ny_plate"));
  m.def("refine_uniform", &refine_uniform);
  m.def("dirichlet_boundary_value",
        [](const ChannelGeometry& g, double x, double y) {
          return dirichlet_boundary_value(g, {x, y});
        },
        py::arg("geometry"), py::arg("x"), py::arg("y"));

  py::class_<PinningParams>(m, "PinningParams")
      .def(py::init<>())
      .def_readwrite("T_p", &PinningParams::T_p)
      .def_readwrite("transition_width", &PinningParams::transition_width);

  py::class_<MaterialParams>(m, "MaterialParams")
      .def(py::init<>())
      .def_readwrite("rho1", &MaterialParams::rho1)
      .def_readwrite("rho2", &MaterialParams::rho2)
      .def_readwrite("eta1", &MaterialParams::eta1)
      .def_readwrite("eta2", &MaterialParams::eta2)
      .def_readwrite("K1", &MaterialParams::K1)
      .def_readwrite("K2", &MaterialParams::K2)
      .def_readwrite("K_slaved", &MaterialParams::K_slaved)
      .def_readwrite("eps1", &MaterialParams::eps1)
      .def_readwrite("eps2", &MaterialParams::eps2)
      .def_readwrite("eps_D", &MaterialParams::eps_D)
      .def_readwrite("gamma", &MaterialParams::gamma)
      .def_readwrite("delta", &MaterialParams::delta)
      .def_readwrite("lambda_", &MaterialParams::lambda)
      .def_readwrite("mobility", &MaterialParams::M_mobility)
      .def_readwrite("alpha", &MaterialParams::alpha)
      .def_readwrite("beta", &MaterialParams::beta_const)
      .def_readwrite("theta_s", &MaterialParams::theta_s)
      .def_readwrite("pinning", &MaterialParams::pinning)
      .def("rho", &MaterialParams::rho)
      .def("eta", &MaterialParams::eta)
      .def("eps", &MaterialParams::eps)
      .def("Kcond", &MaterialParams::Kcond);

  m.def("slave_eval", &slave_eval, py::arg("v1"), py::arg("v2"), py::arg("delta"),
        py::arg("phi"));
  m.def("slave_deriv", &slave_deriv);
  m.def("double_well", [](double phi) {
    auto w = double_well(phi);
    return py::make_tuple(w.value, w.d1, w.d2);
  });
  m.def("theta_fs", [](double phi, double theta_s) {
    auto t = theta_fs(phi, theta_s);
    return py::make_tuple(t.value, t.d1, t.d2);
  });
  m.def("psi_eval", &psi_eval);
  m.def("slip_coefficient", &slip_coefficient);
  m.def("perm_diff_quotient", &perm_diff_quotient);
  m.def("stabilization_bounds", [](const MaterialParams& p) {
    auto b = stabilization_bounds(p);
    return py::make_tuple(b.A_min, b.B_min);
  });

  py::class_<PhysicalScales>(m, "PhysicalScales")
      .def(py::init<>())
      .def_readwrite("rho_scale", &PhysicalScales::rho_scale)
      .def_readwrite("eta_scale", &PhysicalScales::eta_scale)
      .def_readwrite("L_scale", &PhysicalScales::L_scale)
      .def_readwrite("u_scale", &PhysicalScales::u_scale)
      .def_readwrite("V_scale", &PhysicalScales::V_scale)
      .def_readwrite("eps_scale", &PhysicalScales::eps_scale)
      .def_readwrite("M_scale", &PhysicalScales::M_scale)
      .def_readwrite("K_scale", &PhysicalScales::K_scale)
      .def_readwrite("gamma", &PhysicalScales::gamma)
      .def_readwrite("lambda_", &PhysicalScales::lambda)
      .def_readwrite("alpha", &PhysicalScales::alpha);

  py::class_<NonDimGroups>(m, "NonDimGroups")
      .def_readonly("Ca", &NonDimGroups::Ca)
      .def_readonly("Re", &NonDimGroups::Re)
      .def_readonly("We", &NonDimGroups::We)
      .def_readonly("Bo_EW", &NonDimGroups::Bo_EW)
      .def_readonly("Ie", &NonDimGroups::Ie)
      .def_readonly("St_ph", &NonDimGroups::St_ph)
      .def_readonly("Mo", &NonDimGroups::Mo)
      .def_readonly("Ko", &NonDimGroups::Ko)
      .def_readonly("Ch", &NonDimGroups::Ch);
  m.def("nondim_groups", &nondim_groups);

  py::enum_<Preset>(m, "Preset")
      .value("Move", Preset::Move)
      .value("Split", Preset::Split)
      .value("Merge", Preset::Merge)
      .value("Custom", Preset::Custom);

  py::enum_<SchemeMode>(m, "SchemeMode")
      .value("Split", SchemeMode::Split)
      .value("Coupled", SchemeMode::Coupled);

  py::class_<SchemeParams>(m, "SchemeParams")
      .def(py::init<>())
      .def_readwrite("dt", &SchemeParams::dt)
      .def_readwrite("A_stab", &SchemeParams::A_stab)
      .def_readwrite("B_stab", &SchemeParams::B_stab)
      .def_readwrite("mode", &SchemeParams::mode)
      .def_readwrite("picard_tol", &SchemeParams::picard_tol)
      .def_readwrite("picard_max", &SchemeParams::picard_max)
      .def_readwrite("tol_spd", &SchemeParams::tol_spd)
      .def_readwrite("tol_nonsym", &SchemeParams::tol_nonsym);

  py::class_<DropletPrimitive> dp(m, "DropletPrimitive");
  py::enum_<DropletPrimitive::Kind>(dp, "Kind")
      .value("Circle", DropletPrimitive::Kind::Circle)
      .value("Ellipse", DropletPrimitive::Kind::Ellipse)
      .value("HalfPlane", DropletPrimitive::Kind::HalfPlane);
  dp.def(py::init<>())
      .def_readwrite("kind", &DropletPrimitive::kind)
      .def_readwrite("center", &DropletPrimitive::center)
      .def_readwrite("radius", &DropletPrimitive::radius)
      .def_readwrite("semi_axes", &DropletPrimitive::semi_axes)
      .def_readwrite("normal", &DropletPrimitive::normal)
      .def_readwrite("sign", &DropletPrimitive::sign);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("preset", &RunConfig::preset)
      .def_readwrite("geometry", &RunConfig::geometry)
      .def_readwrite("nx", &RunConfig::nx)
      .def_readwrite("ny_fluid", &RunConfig::ny_fluid)
      .def_readwrite("ny_plate", &RunConfig::ny_plate)
      .def_readwrite("refine", &RunConfig::refine)
      .def_readwrite("material", &RunConfig::material)
      .def_readwrite("scheme", &RunConfig::scheme)
      .def_readwrite("droplets", &RunConfig::droplets)
      .def_readwrite("V00", &RunConfig::V00)
      .def_readwrite("n_steps", &RunConfig::n_steps)
      .def_readwrite("vtk_every", &RunConfig::vtk_every)
      .def_readwrite("out_dir", &RunConfig::out_dir);

  m.def("make_preset", &make_preset);
  m.def("parse_config", &parse_config);
  m.def("serialize_config", &serialize_config);

  py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
      .def_readonly("kinetic", &EnergyBreakdown::kinetic)
      .def_readonly("charge", &EnergyBreakdown::charge)
      .def_readonly("cahn_hilliard", &EnergyBreakdown::cahn_hilliard)
      .def_readonly("electrostatic", &EnergyBreakdown::electrostatic)
      .def_readonly("wall", &EnergyBreakdown::wall)
      .def_readonly("total", &EnergyBreakdown::total);

  py::class_<Observables>(m, "Observables")
      .def_readonly("phase_mass", &Observables::phase_mass)
      .def_readonly("total_charge", &Observables::total_charge)
      .def_readonly("div_norm", &Observables::div_norm)
      .def_readonly("interface_length", &Observables::interface_length)
      .def_property_readonly("droplet_centroid", [](const Observables& o) -> py::object {
        if (!o.droplet_centroid) return py::none();
        return py::cast(*o.droplet_centroid);
      });

  py::class_<StepReport>(m, "StepReport")
      .def_readonly("ok", &StepReport::ok)
      .def_readonly("failed_step", &StepReport::failed_step)
      .def_readonly("picard_iters", &StepReport::picard_iters);

  py::class_<Simulation>(m, "Simulation")
      .def(py::init<const RunConfig&>(), py::arg("config"))
      .def("step", &Simulation::step, py::arg("n") = 1)
      .def_property_readonly("t", [](const Simulation& s) { return s.state.t; })
      .def_property_readonly("n", [](const Simulation& s) { return s.state.n; })
      .def_property_readonly("mesh",
                             [](const Simulation& s) -> const Mesh& { return s.sim->mesh(); },
                             py::return_value_policy::reference_internal)
      .def_property_readonly("last_report",
                             [](const Simulation& s) { return s.last_report; })
      .def_property_readonly("phi", [](const Simulation& s) { return as_array(s.state.phi); })
      .def_property_readonly("mu", [](const Simulation& s) { return as_array(s.state.mu); })
      .def_property_readonly("q", [](const Simulation& s) { return as_array(s.state.q); })
      .def_property_readonly("V", [](const Simulation& s) { return as_array(s.state.V); })
      .def_property_readonly("u", [](const Simulation& s) { return as_array(s.state.u); })
      .def_property_readonly("p", [](const Simulation& s) { return as_array(s.state.p); })
      .def("set_phi",
           [](Simulation& s, py::array_t<double> a) {
             auto v = from_array(a);
             if (v.size() != s.state.phi.size()) throw std::invalid_argument("size mismatch");
             s.state.phi = std::move(v);
           })
      .def("energy", [](const Simulation& s) { return energy_total(*s.sim, s.state); })
      .def("observables", [](const Simulation& s) { return observables(*s.sim, s.state); })
      .def("droplet_count", [](const Simulation& s) { return count_droplets(*s.sim, s.state); })
      .def("cfl_suggest",
           [](const Simulation& s, double umax) { return s.sim->cfl_suggest(umax); },
           py::arg("u_max_estimate") = 0.0)
      .def("write_vtk",
           [](const Simulation& s, const std::string& path) { write_vtk(*s.sim, s.state, path); });

  m.def("run_simulation", [](const RunConfig& cfg) {
    const auto r = run_simulation(cfg);
    return py::make_tuple(r.exit_code, r.message);
  });
}
