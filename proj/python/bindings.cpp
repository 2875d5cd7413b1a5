// JSON strings cross the boundary; the Python package decodes them.

#include "lacuna/bestapprox.hpp"
#include "lacuna/errors.hpp"
#include "lacuna/flatbuild.hpp"
#include "lacuna/lemmas.hpp"
#include "lacuna/sublevel.hpp"
#include "lacuna/sweeps.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lacuna;
using nlohmann::json;

namespace {

std::string s(const Real& x) { return x.is_finite() ? x.str(30) : std::string(); }

Poly poly_from(const std::string& j) { return Poly::from_json(json::parse(j)); }

TargetFunction target_from(const std::string& j)
{
    const json v = json::parse(j);
    if (v.is_string()) return TargetFunction::builtin(v.get<std::string>());
    return TargetFunction::from_json(v);
}

std::string approx(const std::string& target, const std::vector<int>& degrees, const std::string& tol, long bits)
{
    PrecisionScope scope(bits);
    const auto f = target_from(target);
    json out = json::array();
    for (const auto& r : approx_sequence(f, degrees, Real(tol))) {
        json pts = json::array();
        for (const auto& x : r.alternation_points) pts.push_back(s(x));
        out.push_back({{"n", r.n},
                       {"error", s(r.error)},
                       {"lower", s(r.lower)},
                       {"upper", s(r.upper)},
                       {"converged", r.converged},
                       {"certified", r.certified},
                       {"alternation_points", pts},
                       {"best_poly", r.best_poly.to_json()},
                       {"note", r.note}});
    }
    return out.dump();
}

std::string sublevel(const std::string& p, const std::string& threshold, long bits)
{
    PrecisionScope scope(bits);
    const auto r = poly_sublevel(poly_from(p), Real(threshold));
    json j = r.set.to_json();
    j["degenerate"] = r.degenerate;
    return j.dump();
}

std::string eset(const std::string& p, const std::string& delta, long bits)
{
    PrecisionScope scope(bits);
    return e_set(poly_from(p), Real(delta)).to_json().dump();
}

std::string measure(const std::string& target, const std::string& t, const std::string& tol, long bits)
{
    PrecisionScope scope(bits);
    const auto m = measure_sublevel(target_from(target), Real(t), Real(tol));
    return json{{"lower", s(m.lower)}, {"upper", s(m.upper)}, {"cells", m.cells}, {"budget_exceeded", m.budget_exceeded}}
        .dump();
}

std::string spreading(const std::string& p, const std::string& e, const std::string& a, const std::string& b,
                      const std::string& delta, const std::string& c, const std::string& eps, long bits)
{
    PrecisionScope scope(bits);
    return spreading_check(poly_from(p), IntervalSet::from_json(json::parse(e)), Interval{Real(a), Real(b)}, Real(delta),
                           Real(c), Real(eps))
        .to_json()
        .dump();
}

std::string claim(const std::string& p, const std::string& delta, const std::string& c, const std::string& eps,
                  int depth_limit, bool enforce_kappa, long bits)
{
    PrecisionScope scope(bits);
    return claim_check(poly_from(p), Real(delta), Real(c), Real(eps), std::nullopt, depth_limit, enforce_kappa)
        .to_json()
        .dump();
}

std::string comparison(const std::string& p, const std::string& delta, const std::string& t, const std::string& gamma,
                       bool enforce_kappa, long bits)
{
    PrecisionScope scope(bits);
    return comparison_check(poly_from(p), Real(delta), Real(t), Real(gamma), std::nullopt, enforce_kappa).to_json().dump();
}

std::string reverify_json(const std::string& cert, long bits)
{
    PrecisionScope scope(bits);
    return reverify(Certificate::from_json(json::parse(cert))).to_json().dump();
}

std::string m_eps(const std::string& t, const std::string& gamma)
{
    PrecisionScope scope(256);
    const auto r = select_m_eps(Real(t), Real(gamma));
    return json{{"M", r.m}, {"c", s(r.c)}, {"eps", s(r.eps)}}.dump();
}

std::string scan(const std::optional<std::string>& target, const std::vector<int>& degrees, const std::string& beta,
                 const std::string& eps, bool tail_bound_mode, long bits)
{
    PrecisionScope scope(bits);
    const auto f = target ? target_from(*target) : lacunary_model(degrees);
    ScanOptions opts;
    opts.eps = Real(eps);
    opts.tail_bound_mode = tail_bound_mode;
    const auto t = theorem_a_scan(f, degrees, Real(beta), opts);
    json j = t.to_json();
    j["ratios_increasing"] = t.ratios_increasing();
    j["csv"] = t.to_csv();
    return j.dump();
}

std::string phi(int n, int l)
{
    const auto ps = phi_series(n, l);
    json c = json::array();
    for (const auto& x : ps.coeffs) c.push_back(s(x));
    return json{{"n", ps.n}, {"l", ps.l}, {"coefficients", c}}.dump();
}

std::string upoly(int n) { return u_poly(n).to_json(Basis::monomial).dump(); }

std::string rpoly(int n, int l) { return r_poly(n, l).to_json(Basis::monomial).dump(); }

std::string theorem_b(const std::string& phi_name, const std::string& psi_name, int stages, double c1, long cap, long bits)
{
    PrecisionScope scope(bits);
    const auto st = build_theorem_b(named_function(phi_name), named_function(psi_name), stages, Real(c1), cap);
    json j = st.to_json();
    j["csv"] = st.to_csv();
    return j.dump();
}

std::string calibrate(double c1, int n_max, int l_max)
{
    const auto r = calibrate_c1(Real(c1), n_max, l_max);
    json j = r.to_json();
    j["sufficient"] = r.sufficient();
    return j.dump();
}

std::string sweep(const std::string& lemma, int count, std::uint64_t seed, int max_degree, int threads, bool enforce_kappa,
                  long bits)
{
    RunConfig cfg;
    cfg.seed = seed;
    cfg.precision_bits = bits;
    SweepOptions o;
    o.lemma = lemma;
    o.count = count;
    o.max_degree = max_degree;
    o.threads = threads;
    o.enforce_kappa = enforce_kappa;
    const auto r = run_sweep(o, cfg);
    json j = r.summary();
    j["csv"] = r.to_csv();
    return j.dump();
}

std::string beurling(const std::vector<std::string>& errors, int n_terms, long bits)
{
    PrecisionScope scope(bits);
    std::vector<Real> e;
    e.reserve(errors.size());
    for (const auto& x : errors) e.emplace_back(x);
    return s(beurling_partial_sum(e, n_terms));
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "lacuna native core";

    py::register_exception<Error>(m, "LacunaError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    using release = py::call_guard<py::gil_scoped_release>;
    m.def("approx", &approx, release());
    m.def("sublevel", &sublevel, release());
    m.def("e_set", &eset, release());
    m.def("measure", &measure, release());
    m.def("log_kappa", &log_kappa, release());
    m.def("select_m_eps", &m_eps, release());
    m.def("spreading", &spreading, release());
    m.def("claim", &claim, release());
    m.def("comparison", &comparison, release());
    m.def("reverify", &reverify_json, release());
    m.def("scan", &scan, release());
    m.def("phi_series", &phi, release());
    m.def("u_poly", &upoly, release());
    m.def("r_poly", &rpoly, release());
    m.def("theorem_b", &theorem_b, release());
    m.def("calibrate", &calibrate, release());
    m.def("sweep", &sweep, release());
    m.def("beurling", &beurling, release());
}
