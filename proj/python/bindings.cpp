#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tempstable/cli.hpp"
#include "tempstable/errors.hpp"
#include "tempstable/estimation.hpp"
#include "tempstable/io.hpp"
#include "tempstable/measures.hpp"
#include "tempstable/pricing.hpp"
#include "tempstable/tsdist.hpp"

namespace py = pybind11;
using namespace tempstable;

namespace {

std::string repr_params(const TsParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "TsParams(alpha_plus=" << p.alpha_plus << ", beta_plus=" << p.beta_plus << ", lambda_plus=" << p.lambda_plus
       << ", alpha_minus=" << p.alpha_minus << ", beta_minus=" << p.beta_minus << ", lambda_minus=" << p.lambda_minus
       << ")";
    return os.str();
}

MeasureSpec make_spec(const std::string& kind, double p) {
    MeasureSpec s;
    s.kind = parse_measure_kind(kind);
    s.p = p;
    return s;
}

}  // namespace

PYBIND11_MODULE(_tempstable, m) {
    m.doc() = "Tempered stable laws, martingale measures and option pricing";

    auto base = py::register_exception<Error>(m, "TempstableError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base);
    py::register_exception<NotAMartingaleCandidate>(m, "NotAMartingaleCandidate", base);
    py::register_exception<PhysicalNotMartingale>(m, "PhysicalNotMartingale", base);
    py::register_exception<NoEsscherMeasure>(m, "NoEsscherMeasure", base);
    py::register_exception<EmptyMartingaleFamily>(m, "EmptyMartingaleFamily", base);
    py::register_exception<LambdaTooSmall>(m, "LambdaTooSmall", base);
    py::register_exception<NoFsMeasure>(m, "NoFsMeasure", base);
    py::register_exception<ContourViolation>(m, "ContourViolation", base);
    py::register_exception<QuadratureFailure>(m, "QuadratureFailure", base);
    py::register_exception<PriceOutOfBand>(m, "PriceOutOfBand", base);
    py::register_exception<TooFewObservations>(m, "TooFewObservations", base);
    py::register_exception<DegenerateSample>(m, "DegenerateSample", base);
    py::register_exception<NoSolution>(m, "NoSolution", base);
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<UsageError>(m, "UsageError", base);

    py::class_<TsParams>(m, "TsParams")
        .def(py::init<double, double, double, double, double, double>(), py::arg("alpha_plus"), py::arg("beta_plus"),
             py::arg("lambda_plus"), py::arg("alpha_minus"), py::arg("beta_minus"), py::arg("lambda_minus"))
        .def_readwrite("alpha_plus", &TsParams::alpha_plus)
        .def_readwrite("beta_plus", &TsParams::beta_plus)
        .def_readwrite("lambda_plus", &TsParams::lambda_plus)
        .def_readwrite("alpha_minus", &TsParams::alpha_minus)
        .def_readwrite("beta_minus", &TsParams::beta_minus)
        .def_readwrite("lambda_minus", &TsParams::lambda_minus)
        .def("validate", [](const TsParams& p) { validate(p); })
        .def(py::self == py::self)
        .def("__repr__", &repr_params);

    py::class_<LawComponent>(m, "LawComponent")
        .def_readonly("params", &LawComponent::params)
        .def_readonly("time_scale", &LawComponent::time_scale);

    py::class_<TsLaw>(m, "TsLaw")
        .def(py::init<const TsParams&, double>(), py::arg("params"), py::arg("time_scale") = 1.0)
        .def_property_readonly("components", &TsLaw::components)
        .def("scaled", &TsLaw::scaled, py::arg("t"))
        .def("tilted", &TsLaw::tilted, py::arg("theta"))
        .def("log_mgf", py::overload_cast<double>(&TsLaw::log_mgf, py::const_), py::arg("s"))
        .def("log_mgf", py::overload_cast<cplx>(&TsLaw::log_mgf, py::const_), py::arg("s"))
        .def("cf", [](const TsLaw& law, cplx z) { return cf(law, z); }, py::arg("z"))
        .def("mean", [](const TsLaw& law) { return mean(law); })
        .def("cumulant", [](const TsLaw& law, int k) { return cumulant(law, k); }, py::arg("k"))
        .def("density", [](const TsLaw& law, double x) { return density(law, x); }, py::arg("x"))
        .def("cdf", [](const TsLaw& law, double x) { return cdf(law, x); }, py::arg("x"))
        .def("survival", [](const TsLaw& law, double x) { return survival(law, x); }, py::arg("x"))
        .def(
            "sample", [](const TsLaw& law, std::size_t n, double floor, std::uint64_t seed) {
                return sample_approx(law, n, floor, seed);
            },
            py::arg("n"), py::arg("jump_floor") = kDefaultJumpFloor, py::arg("seed") = 1)
        .def_property_readonly("lambda_plus_min", &TsLaw::lambda_plus_min)
        .def_property_readonly("lambda_minus_min", &TsLaw::lambda_minus_min)
        .def(py::self == py::self);

    m.def("cgf", py::overload_cast<const TsParams&, double>(&cgf), py::arg("params"), py::arg("z"));
    m.def("cgf", py::overload_cast<const TsParams&, cplx>(&cgf), py::arg("params"), py::arg("z"));
    m.def("cumulant", py::overload_cast<const TsParams&, int>(&cumulant), py::arg("params"), py::arg("k"));

    py::class_<Market>(m, "Market")
        .def(py::init([](double r, double q, double s0, int days) { return Market{r, q, s0, days}; }),
             py::arg("r") = 0.0, py::arg("q") = 0.0, py::arg("s0") = 1.0, py::arg("days_per_year") = 255)
        .def_static("from_annual", &Market::from_annual, py::arg("annual_rate"), py::arg("annual_dividend"),
                    py::arg("s0"), py::arg("days_per_year") = 255)
        .def_readwrite("r", &Market::r)
        .def_readwrite("q", &Market::q)
        .def_readwrite("s0", &Market::s0)
        .def_readwrite("days_per_year", &Market::days_per_year);

    py::class_<MeasureDiagnostics>(m, "MeasureDiagnostics")
        .def_readonly("residual", &MeasureDiagnostics::residual)
        .def_readonly("iterations", &MeasureDiagnostics::iterations)
        .def_readonly("objective_value", &MeasureDiagnostics::objective_value)
        .def_readonly("grid_ties", &MeasureDiagnostics::grid_ties);

    py::class_<MeasureSolution>(m, "MeasureSolution")
        .def_property_readonly("kind", [](const MeasureSolution& s) { return std::string(to_string(s.spec.kind)); })
        .def_readonly("theta_plus", &MeasureSolution::theta_plus)
        .def_readonly("theta_minus", &MeasureSolution::theta_minus)
        .def_readonly("c", &MeasureSolution::c)
        .def_readonly("law_per_day", &MeasureSolution::law_per_day)
        .def_readonly("diagnostics", &MeasureSolution::diagnostics)
        .def("to_json", [](const MeasureSolution& s) { return io::to_json(s).dump(); });

    m.def("martingale_residual", &martingale_residual, py::arg("law"), py::arg("market"));
    m.def("esscher_solve", &esscher_solve, py::arg("params"), py::arg("market"));
    m.def("min_entropy_solve", &min_entropy_solve, py::arg("params"), py::arg("market"));
    m.def("p_optimal_solve", &p_optimal_solve, py::arg("params"), py::arg("market"), py::arg("p"));
    m.def("fs_constant", &fs_constant, py::arg("params"), py::arg("market"));
    m.def("fs_solve", &fs_solve, py::arg("params"), py::arg("market"));
    m.def("physical_solve", &physical_solve, py::arg("params"), py::arg("market"));
    m.def(
        "solve_measure",
        [](const TsParams& p, const Market& mkt, const std::string& kind, double pexp) {
            return solve_measure(p, mkt, make_spec(kind, pexp));
        },
        py::arg("params"), py::arg("market"), py::arg("kind"), py::arg("p") = 2.0);
    m.def("bilateral_phi", &bilateral_phi, py::arg("params"), py::arg("market"), py::arg("theta_plus"));
    m.def("entropy", &entropy, py::arg("params"), py::arg("theta_plus"), py::arg("theta_minus"));
    m.def("p_distance", &p_distance, py::arg("params"), py::arg("theta_plus"), py::arg("theta_minus"), py::arg("p"));

    py::class_<SurfaceCell>(m, "SurfaceCell")
        .def_readonly("strike", &SurfaceCell::strike)
        .def_readonly("maturity", &SurfaceCell::maturity)
        .def_readonly("price", &SurfaceCell::price)
        .def_readonly("implied_vol", &SurfaceCell::implied_vol)
        .def_readonly("status", &SurfaceCell::status)
        .def_readonly("message", &SurfaceCell::message);

    auto contour_cfg = [](std::optional<double> nu, std::size_t max_evals) {
        ContourConfig cfg;
        cfg.nu = nu;
        cfg.max_evals = max_evals;
        return cfg;
    };
    m.def(
        "price_fourier",
        [contour_cfg](const TsLaw& law_T, const Market& mkt, double strike, double maturity, std::optional<double> nu,
                      std::size_t max_evals) {
            return price_fourier(law_T, mkt, {strike, maturity}, contour_cfg(nu, max_evals));
        },
        py::arg("law_T"), py::arg("market"), py::arg("strike"), py::arg("maturity"), py::arg("nu") = py::none(),
        py::arg("max_evals") = 200000);
    m.def(
        "price_closed_form",
        [](const TsLaw& law_per_day, const Market& mkt, double strike, double maturity) {
            return price_closed_form(law_per_day, mkt, {strike, maturity});
        },
        py::arg("law_per_day"), py::arg("market"), py::arg("strike"), py::arg("maturity"));
    m.def(
        "price_black_scholes",
        [](const Market& mkt, double strike, double maturity, double sigma) {
            return price_black_scholes(mkt, {strike, maturity}, sigma);
        },
        py::arg("market"), py::arg("strike"), py::arg("maturity"), py::arg("sigma"));
    m.def(
        "implied_vol",
        [](const Market& mkt, double strike, double maturity, double price) {
            return implied_vol(mkt, {strike, maturity}, price);
        },
        py::arg("market"), py::arg("strike"), py::arg("maturity"), py::arg("price"));
    m.def(
        "surface",
        [contour_cfg](const TsLaw& law_per_day, const Market& mkt, const std::vector<double>& strikes,
                      const std::vector<double>& maturities, unsigned threads) {
            py::gil_scoped_release release;
            return surface(law_per_day, mkt, strikes, maturities, contour_cfg(std::nullopt, 200000), threads);
        },
        py::arg("law_per_day"), py::arg("market"), py::arg("strikes"), py::arg("maturities"), py::arg("threads") = 1);

    py::class_<RawMoments>(m, "RawMoments")
        .def(py::init([](double m1, double m2, double m3, double m4) { return RawMoments{m1, m2, m3, m4}; }),
             py::arg("m1"), py::arg("m2"), py::arg("m3"), py::arg("m4"))
        .def_readonly("m1", &RawMoments::m1)
        .def_readonly("m2", &RawMoments::m2)
        .def_readonly("m3", &RawMoments::m3)
        .def_readonly("m4", &RawMoments::m4);

    py::class_<MomCoefficients>(m, "MomCoefficients")
        .def(py::init([](double c1, double c2, double c3, double c4) { return MomCoefficients{c1, c2, c3, c4}; }),
             py::arg("c1"), py::arg("c2"), py::arg("c3"), py::arg("c4"))
        .def_readonly("c1", &MomCoefficients::c1)
        .def_readonly("c2", &MomCoefficients::c2)
        .def_readonly("c3", &MomCoefficients::c3)
        .def_readonly("c4", &MomCoefficients::c4);

    py::class_<NormalFit>(m, "NormalFit")
        .def_readonly("mu", &NormalFit::mu)
        .def_readonly("sigma", &NormalFit::sigma);

    m.def("raw_moments", [](const std::vector<double>& xs) { return raw_moments(xs); }, py::arg("returns"));
    m.def(
        "empirical_moments", [](std::vector<double> xs) { return empirical_moments(std::move(xs)).moments; },
        py::arg("returns"));
    m.def("log_returns", [](const std::vector<double>& prices) { return log_returns(prices); }, py::arg("prices"));
    m.def("moment_coefficients", py::overload_cast<const RawMoments&, double>(&moment_coefficients),
          py::arg("moments"), py::arg("beta"));
    m.def("coefficients_of", &coefficients_of, py::arg("params"));
    m.def("mom_solve", &mom_solve, py::arg("coefficients"), py::arg("beta"));
    m.def("fit_normal", py::overload_cast<const RawMoments&>(&fit_normal), py::arg("moments"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr).");
}
