#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <sstream>

#include "hessflow/io.hpp"
#include "hessflow/operators.hpp"

namespace py = pybind11;
using namespace hessflow;

namespace {

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> field_array(const ScalarField& f) {
  std::vector<py::ssize_t> shape(f.grid.shape.begin(), f.grid.shape.begin() + f.grid.n);
  py::array_t<double> out(shape);
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

py::dict grid_dict(const Grid& g) {
  py::dict d;
  d["shape"] = std::vector<int>(g.shape.begin(), g.shape.begin() + g.n);
  d["spacing"] = std::vector<double>(g.spacing.begin(), g.spacing.begin() + g.n);
  d["topology"] = g.topology == Topology::Periodic ? "periodic" : "box";
  return d;
}

py::dict rows_dict(const std::vector<MonitorRow>& rows) {
  std::vector<double> t, u, gu, hu, ut, w, slack;
  for (const auto& r : rows) {
    t.push_back(r.t);
    u.push_back(r.sup_u);
    gu.push_back(r.sup_grad_u);
    hu.push_back(r.sup_hess_u);
    ut.push_back(r.sup_ut);
    w.push_back(r.w.value_or(std::nan("")));
    slack.push_back(r.slack.value_or(std::nan("")));
  }
  py::dict d;
  d["t"] = to_array(t);
  d["supU"] = to_array(u);
  d["supGradU"] = to_array(gu);
  d["supHessU"] = to_array(hu);
  d["supUt"] = to_array(ut);
  d["W"] = to_array(w);
  d["slack"] = to_array(slack);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hessflow native core";

  py::register_exception<ConeViolation>(m, "ConeViolation", PyExc_ValueError);
  py::register_exception<InvalidConfiguration>(m, "InvalidConfiguration", PyExc_ValueError);
  py::register_exception<StepFailure>(m, "StepFailure", PyExc_RuntimeError);

  py::class_<OperatorSpec>(m, "OperatorSpec")
      .def_static("sigma_root", &OperatorSpec::sigma_root, py::arg("k"), py::arg("n"))
      .def_static("sigma_quotient", &OperatorSpec::sigma_quotient, py::arg("k"), py::arg("l"),
                  py::arg("n"))
      .def_static("log_pk", &OperatorSpec::log_pk, py::arg("k"), py::arg("n"))
      .def_readonly("k", &OperatorSpec::k)
      .def_readonly("l", &OperatorSpec::l)
      .def_readonly("n", &OperatorSpec::n)
      .def_property_readonly("name", &OperatorSpec::name)
      .def("__repr__", &OperatorSpec::name);

  m.def("sigma_k", [](const std::vector<double>& lambda, int k) { return sigma_k(lambda, k); },
        py::arg("lam"), py::arg("k"));
  m.def("eval_f", [](const OperatorSpec& s, const std::vector<double>& l) { return eval_f(s, l); },
        py::arg("spec"), py::arg("lam"));
  m.def("grad_f", [](const OperatorSpec& s, const std::vector<double>& l) { return grad_f(s, l); },
        py::arg("spec"), py::arg("lam"));
  m.def(
      "hess_f",
      [](const OperatorSpec& s, const std::vector<double>& l) {
        const Matrix h = hess_f(s, l);
        py::array_t<double> out({s.n, s.n});
        auto v = out.mutable_unchecked<2>();
        for (int i = 0; i < s.n; ++i)
          for (int j = 0; j < s.n; ++j) v(i, j) = h(i, j);
        return out;
      },
      py::arg("spec"), py::arg("lam"));

  m.def(
      "check_structure",
      [](const OperatorSpec& s, int budget, std::uint64_t seed, double lo, double hi) {
        const auto r = check_structure(s, budget, seed, lo, hi);
        py::dict d;
        for (const auto& e : r.entries) {
          py::dict c;
          c["holds"] = e.holds;
          c["margin"] = e.margin;
          c["constant"] = e.constant;
          c["note"] = e.note;
          d[py::str(e.id)] = c;
        }
        return d;
      },
      py::arg("spec"), py::arg("budget") = 10000, py::arg("seed") = 20240611,
      py::arg("band_lo") = 0.5, py::arg("band_hi") = 2.0);

  m.def(
      "verify_concavity_gap",
      [](const OperatorSpec& s, const std::vector<std::vector<double>>& K, double beta, int budget,
         std::uint64_t seed) {
        const auto r = verify_concavity_gap(s, K, beta, budget, seed);
        py::dict d;
        d["epsilon_hat"] = r.epsilon_hat ? py::cast(*r.epsilon_hat) : py::none();
        d["violations"] = r.violations;
        d["constrained"] = r.constrained;
        d["sampled"] = r.sampled;
        return d;
      },
      py::arg("spec"), py::arg("K"), py::arg("beta"), py::arg("budget"), py::arg("seed"));

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config_text, std::optional<std::uint64_t> seed,
         const std::string& out_dir, bool quiet) {
        std::ostringstream out, err;
        io::Command cmd{name, "", seed, out_dir, quiet};
        int code;
        {
          py::gil_scoped_release release;
          code = io::run_command_text(cmd, config_text, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("name"), py::arg("config_text"), py::arg("seed") = py::none(),
      py::arg("out_dir") = ".", py::arg("quiet") = false,
      "Runs one command on configuration text; returns (exit_code, stdout, stderr).");

  m.def(
      "solve",
      [](const std::string& config_text, std::optional<std::uint64_t> seed) {
        const auto cfg = io::parse_config(config_text, seed);
        if (!cfg.problem) throw InvalidConfiguration("configuration has no problem");
        Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = solve(*cfg.problem, cfg.monitors);
        }
        py::dict d = rows_dict(traj.rows);
        d["u"] = field_array(traj.states.back().u);
        d["stop_reason"] = traj.stop_reason;
        return d;
      },
      py::arg("config_text"), py::arg("seed") = py::none(),
      "Solves the configured problem; returns monitor columns and the final field.");

  m.def(
      "read_snapshot",
      [](const std::string& path) {
        const auto f = io::read_snapshot(path);
        py::dict d = grid_dict(f.grid);
        d["time"] = f.time;
        d["values"] = field_array(f);
        return d;
      },
      py::arg("path"));

  m.def(
      "write_snapshot",
      [](const std::string& path, py::array_t<double, py::array::c_style | py::array::forcecast> values,
         std::vector<double> spacing, double time, const std::string& topology) {
        if (values.ndim() < 2 || values.ndim() > 3 ||
            static_cast<std::size_t>(values.ndim()) != spacing.size())
          throw InvalidConfiguration("write_snapshot: values must be 2-D or 3-D matching spacing");
        Grid g;
        g.n = static_cast<int>(values.ndim());
        for (int a = 0; a < g.n; ++a) {
          g.shape[a] = static_cast<int>(values.shape(a));
          g.spacing[a] = spacing[a];
        }
        if (topology == "periodic") g.topology = Topology::Periodic;
        else if (topology == "box") g.topology = Topology::DirichletBox;
        else throw InvalidConfiguration("write_snapshot: topology must be periodic or box");
        ScalarField f(g, 0.0, time);
        f.values = as_vector(values);
        io::write_snapshot(path, f);
      },
      py::arg("path"), py::arg("values"), py::arg("spacing"), py::arg("time") = 0.0,
      py::arg("topology") = "periodic");

  m.def(
      "parse_csv",
      [](const std::string& text) {
        const auto t = io::parse_csv(text);
        py::dict d;
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
          std::vector<double> col;
          for (const auto& r : t.rows) col.push_back(r[c].value_or(std::nan("")));
          d[py::str(t.columns[c])] = to_array(col);
        }
        return d;
      },
      py::arg("text"));

  m.def("render_svg_report", [](const std::string& csv) {
    return io::render_svg_report(io::parse_csv(csv));
  });
}
