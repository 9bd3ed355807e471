#include "dfc/blockcorr.hpp"
#include "dfc/convt.hpp"
#include "dfc/egarch.hpp"
#include "dfc/estimate.hpp"
#include "dfc/loadings.hpp"
#include "dfc/matcorr.hpp"
#include "dfc/report_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dfc;

namespace {

BlockSpec make_blocks(const std::vector<Index>& sizes, const std::vector<Index>& sectors, const std::string& structure) {
  return BlockSpec(sizes, sectors, structure_from_string(structure));
}

ConvTSpec make_dist(const std::string& kind, const std::vector<Index>& m, const Vector& nu) {
  Index n = 0;
  for (Index v : m) n += v;
  switch (dist_from_string(kind)) {
    case DistKind::Gauss: return ConvTSpec::gauss(n);
    case DistKind::MT: return ConvTSpec::mt(n, nu(0));
    case DistKind::CT: return ConvTSpec::ct(m, nu);
    case DistKind::HT: return ConvTSpec::ht(nu);
  }
  throw SpecError("unknown distribution");
}

FitOptions options(int max_iter) {
  FitOptions o;
  if (max_iter > 0) o.bfgs.max_iter = max_iter;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dynamic factor correlation models";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<StructureError>(m, "StructureError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);

  m.def("matrix_log", &matrix_log, py::arg("c"));
  m.def("gamma_of_corr", &gamma_of_corr, py::arg("c"));
  m.def("corr_of_gamma", [](const Vector& g) { return corr_of_gamma(g); }, py::arg("gamma"));
  m.def("tau_of_rho", &tau_of_rho, py::arg("rho"));
  m.def("rho_of_tau", &rho_of_tau, py::arg("tau"));

  m.def(
      "eta_of_block",
      [](const Matrix& c, const std::vector<Index>& sizes, const std::vector<Index>& sectors, const std::string& s) {
        return eta_of_block(c, make_blocks(sizes, sectors, s));
      },
      py::arg("c"), py::arg("group_sizes"), py::arg("sectors") = std::vector<Index>{}, py::arg("structure") = "fbc");
  m.def(
      "block_of_eta",
      [](const Vector& eta, const std::vector<Index>& sizes, const std::vector<Index>& sectors, const std::string& s) {
        return block_of_eta(eta, make_blocks(sizes, sectors, s));
      },
      py::arg("eta"), py::arg("group_sizes"), py::arg("sectors") = std::vector<Index>{}, py::arg("structure") = "fbc");

  m.def(
      "loglik",
      [](const Vector& x, const Vector& mu, const Matrix& xi, const std::string& kind, const std::vector<Index>& groups,
         const Vector& nu) { return loglik(x, mu, xi, make_dist(kind, groups, nu)); },
      py::arg("x"), py::arg("mu"), py::arg("xi"), py::arg("dist") = "gauss", py::arg("groups"),
      py::arg("nu") = Vector());

  m.def("bic", &bic, py::arg("loglik"), py::arg("p"), py::arg("T"));

  m.def(
      "egarch_fit",
      [](const Vector& r) {
        const EgarchFit f = egarch_fit(r);
        json j = to_json(f.params);
        j["loglik"] = f.filter.loglik;
        return py::make_tuple(j.dump(), f.filter.z, f.filter.sigma);
      },
      py::arg("returns"));

  m.def(
      "fit_factor",
      [](const Matrix& f, const std::string& dist, int max_iter) {
        const FactorFit fit = fit_factor_model(f, dist_from_string(dist), options(max_iter));
        return py::make_tuple(to_json(fit).dump(), fit.filter.u);
      },
      py::arg("f"), py::arg("dist") = "mt", py::arg("max_iter") = 0);

  m.def(
      "fit_decoupled",
      [](const Matrix& z, const Matrix& u, const std::vector<Index>& sizes, const std::vector<Index>& sectors,
         const std::string& structure, const std::string& dist, const std::string& scaling, int max_iter) {
        const DecoupledFit fit = fit_core_decoupled(z, u, make_blocks(sizes, sectors, structure),
                                                    dist_from_string(dist), scaling_from_string(scaling),
                                                    options(max_iter));
        return to_json(fit).dump();
      },
      py::arg("z"), py::arg("u"), py::arg("group_sizes"), py::arg("sectors") = std::vector<Index>{},
      py::arg("structure") = "fbc", py::arg("dist") = "gauss", py::arg("scaling") = "tikhonov",
      py::arg("max_iter") = 0);

  m.def(
      "fit_joint",
      [](const Matrix& z, const Matrix& u, const std::vector<Index>& sizes, const std::vector<Index>& sectors,
         const std::string& structure, const std::string& dist, const std::string& scaling, int max_iter) {
        const JointFit fit = fit_core_joint(z, u, make_blocks(sizes, sectors, structure), dist_from_string(dist),
                                            scaling_from_string(scaling), options(max_iter));
        return to_json(fit).dump();
      },
      py::arg("z"), py::arg("u"), py::arg("group_sizes"), py::arg("sectors") = std::vector<Index>{},
      py::arg("structure") = "fbc", py::arg("dist") = "gauss", py::arg("scaling") = "tikhonov",
      py::arg("max_iter") = 0);

  m.def(
      "evaluate_oos",
      [](const std::string& fit_json, const Matrix& z, const Matrix& u, Index split) {
        const json j = json::parse(fit_json);
        const OosReport r = j.at("method") == "joint" ? evaluate_oos(joint_fit_from_json(j), z, u, split)
                                                       : evaluate_oos(decoupled_fit_from_json(j), z, u, split);
        return to_json(r).dump();
      },
      py::arg("fit"), py::arg("z"), py::arg("u"), py::arg("split"));

  m.def(
      "simulate_factor",
      [](const Vector& mean, double beta, double alpha, const std::string& dist, const Vector& nu, Index T,
         std::uint64_t seed) {
        const Index r = static_cast<Index>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * mean.size())) / 2.0));
        return simulate_factor(Recursion::constant(mean, beta, alpha), make_dist(dist, {r}, nu), T, seed);
      },
      py::arg("mean"), py::arg("beta"), py::arg("alpha"), py::arg("dist") = "gauss", py::arg("nu") = Vector(),
      py::arg("T"), py::arg("seed") = 1);
}
