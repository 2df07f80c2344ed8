#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twoend/cli_io.hpp"
#include "twoend/errors.hpp"
#include "twoend/profile.hpp"
#include "twoend/reduced.hpp"

namespace py = pybind11;
using namespace twoend;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Axisymmetric two-end Allen-Cahn lab";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("profile", &profile::eval, py::arg("t"), py::arg("order") = 0);
  m.def("c0", [] { return profile::compute_c0(); });
  m.def("c1", [] { return profile::compute_c1(); });
  m.def("toda", &reduced::toda_explicit, py::arg("eps"), py::arg("r"), py::arg("order") = 0);

  m.def("jacobi_fields", [](double z) {
    const auto j = reduced::jacobi_fields(z);
    return py::dict(py::arg("xi1") = j.xi1, py::arg("xi2") = j.xi2, py::arg("dxi1") = j.dxi1,
                    py::arg("dxi2") = j.dxi2, py::arg("wronskian") = j.wronskian);
  });

  m.def(
      "probe",
      [](double k_target, int trials, std::uint64_t seed, int threads) {
        reduced::ProbeOptions opt;
        opt.trials = trials;
        opt.seed = seed;
        opt.threads = threads;
        reduced::ProbeReport rep;
        {
          py::gil_scoped_release release;
          rep = reduced::nonexistence_probe(k_target, opt);
        }
        std::vector<double> final_mu;
        for (const auto& t : rep.trials) final_mu.push_back(t.final_mu);
        return py::dict(py::arg("verdict") = rep.verdict(), py::arg("delta_obs") = rep.delta_obs,
                        py::arg("failures") = rep.failures, py::arg("undecided") = rep.undecided,
                        py::arg("final_mu") = final_mu);
      },
      py::arg("k_target"), py::arg("trials") = 50, py::arg("seed") = 20240611, py::arg("threads") = 0);

  m.def("normalize_config", [](const std::string& text) { return cli::emit_config(cli::validate_config(text)); },
        py::arg("text"));

  m.def(
      "oracle_suite",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : cli::oracle_suite(seed))
          out.append(py::dict(py::arg("name") = c.name, py::arg("value") = c.value,
                              py::arg("tolerance") = c.tolerance, py::arg("pass") = c.pass));
        return out;
      },
      py::arg("seed") = 20240611);

  m.def(
      "run_text",
      [](const std::string& text, const std::string& out, bool quiet) {
        cli::RunConfig config = cli::validate_config(text);
        if (!out.empty()) config.out = out;
        cli::RunOptions opt;
        opt.quiet = quiet;
        cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = cli::run(config, opt);
        }
        return py::make_tuple(r.exit_code, r.report);
      },
      py::arg("text"), py::arg("out") = "", py::arg("quiet") = true);
}
