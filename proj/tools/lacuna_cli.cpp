#include "lacuna/bestapprox.hpp"
#include "lacuna/errors.hpp"
#include "lacuna/flatbuild.hpp"
#include "lacuna/lemmas.hpp"
#include "lacuna/report.hpp"
#include "lacuna/sublevel.hpp"
#include "lacuna/sweeps.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace lacuna;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kInput = 2;

// Inline JSON when the argument starts with { or [, otherwise a file path.
json load_json(const std::string& arg)
{
    const auto first = arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return json::parse(arg);
    std::ifstream in(arg);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + arg);
    return json::parse(in);
}

TargetFunction load_target(const std::string& arg)
{
    for (const char* name : {"abs", "exp", "runge", "sign_smooth"})
        if (arg == name) return TargetFunction::builtin(arg);
    return TargetFunction::from_json(load_json(arg));
}

std::string s30(const Real& x) { return x.is_finite() ? x.str(30) : std::string(); }

json approx_json(const ApproxResult& r)
{
    json pts = json::array();
    for (const auto& x : r.alternation_points) pts.push_back(x.str(30));
    return {{"n", r.n},
            {"error", s30(r.error)},
            {"lower", s30(r.lower)},
            {"upper", s30(r.upper)},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"certified", r.certified},
            {"monotone", r.monotone},
            {"alternation_points", pts},
            {"best_poly", r.best_poly.to_json()},
            {"note", r.note}};
}

std::string cert_csv(const std::vector<Certificate>& certs)
{
    std::ostringstream os;
    os << "instance_id,lemma,claimed,measured,slack,pass\n";
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const auto& c = certs[i];
        os << i << ',' << c.lemma << ',' << s30(c.claimed) << ',' << s30(c.measured) << ',' << s30(c.slack) << ','
           << (c.pass ? "true" : "false") << '\n';
    }
    return os.str();
}

void announce(const std::vector<std::filesystem::path>& files)
{
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

int emit_certificates(const std::string& stem, const std::vector<Certificate>& certs, const RunConfig& cfg)
{
    json doc = json::array();
    std::vector<json> rows;
    bool ok = true;
    for (const auto& c : certs) {
        doc.push_back(c.to_json());
        rows.push_back(c.to_json());
        ok &= c.pass;
    }
    auto files = emit_report(stem, certs.size() == 1 ? doc[0] : doc, cert_csv(certs), cfg);
    if (cfg.wants_json()) {
        auto p = cfg.output_dir / (stem + ".jsonl");
        write_atomic(p, to_jsonl(rows));
        files.push_back(p);
    }
    announce(files);
    for (const auto& c : certs)
        std::cout << c.lemma << ": measured " << c.measured.str(12) << " claimed " << c.claimed.str(12) << " slack "
                  << c.slack.str(4) << (c.pass ? " pass" : " FAIL") << '\n';
    return ok ? kOk : kFail;
}

int emit_sweep_result(const SweepResult& r, const RunConfig& cfg)
{
    announce(emit_sweep(r, cfg));
    const auto s = r.summary();
    std::cout << r.lemma << " sweep: " << s["instances"] << " instances, " << s["pass"] << " pass, " << s["fail"]
              << " fail, " << s["skipped"] << " skipped, " << s["error"] << " error";
    if (r.lemma == "spreading") std::cout << "; slack 2: " << s["pass_slack2"] << ", slack 4: " << s["pass_slack4"];
    std::cout << '\n';
    return r.count("fail") + r.count("error") == 0 ? kOk : kFail;
}

struct SweepFlags {
    int count = 0;
    int max_degree = 0;
    int threads = 0;
    bool no_gate = false;
};

int run_sweep_cmd(const std::string& lemma, const SweepFlags& f, const RunConfig& cfg)
{
    SweepOptions o;
    o.lemma = lemma;
    o.count = f.count;
    o.max_degree = f.max_degree;
    o.threads = f.threads;
    o.enforce_kappa = !f.no_gate;
    return emit_sweep_result(run_sweep(o, cfg), cfg);
}

// Computational errors become an error report with exit 1; bad input exits 2.
int guarded(const std::string& command, const RunConfig& cfg, const std::function<int()>& body)
{
    try {
        cfg.validate();
        PrecisionScope scope(cfg.precision_bits);
        return body();
    } catch (const Error& e) {
        std::cerr << "lacuna " << command << ": " << e.what() << '\n';
        if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Io || e.kind() == ErrorKind::EvenDegree)
            return kInput;
        try {
            const json doc = {{"command", command}, {"error", e.what()}, {"error_kind", to_string(e.kind())},
                              {"config", cfg.to_json()}};
            std::string stem = command;
            std::replace(stem.begin(), stem.end(), '-', '_');
            announce(emit_report(stem + "_error", doc, "command,error\n" + command + "," + csv_field(e.what()) + "\n", cfg));
        } catch (const Error& io) {
            std::cerr << io.what() << '\n';
            return kInput;
        }
        return kFail;
    } catch (const json::exception& e) {
        std::cerr << "lacuna " << command << ": bad JSON input: " << e.what() << '\n';
        return kInput;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"lacuna: certified quasianalyticity computations"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    long precision = cfg.precision_bits;
    double tol = cfg.tolerance;
    std::uint64_t seed = cfg.seed;
    int degree_cap = cfg.degree_cap;
    double c1 = cfg.c1;
    std::string out = ".", format = "both", config_path;
    app.add_option("--precision", precision, "Working precision in bits (>= 64)");
    app.add_option("--tol", tol, "Target tolerance (> 0)");
    app.add_option("--seed", seed, "Seed for random sweeps");
    app.add_option("--degree-cap", degree_cap, "Degree cap for the flat construction");
    app.add_option("--c1", c1, "The constant C1 of the flat construction");
    app.add_option("--out", out, "Output directory");
    app.add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
    app.add_option("--config", config_path, "key = value config file; flags override it");

    // approx
    auto* approx = app.add_subcommand("approx", "Best uniform approximation errors E_n(f)");
    std::string target = "abs";
    std::vector<int> degrees;
    approx->add_option("--target", target, "Builtin name (abs, exp, runge, sign_smooth), JSON or path");
    approx->add_option("--degrees", degrees, "Comma separated degrees")->delimiter(',')->required();

    // levelset
    auto* levelset = app.add_subcommand("levelset", "Sublevel sets of a polynomial or measures m_f(t)");
    std::string lv_poly, lv_target, lv_threshold, lv_delta;
    levelset->add_option("--poly", lv_poly, "Polynomial JSON or path");
    levelset->add_option("--target", lv_target, "Target function (measure only)");
    levelset->add_option("--threshold", lv_threshold, "Absolute threshold t");
    levelset->add_option("--delta", lv_delta, "Relative threshold e^(-delta n) ||p||");

    // spreading
    auto* spreading = app.add_subcommand("spreading", "Polynomial spreading certificates");
    std::string sp_poly, sp_e, sp_delta, sp_c, sp_eps;
    std::vector<std::string> sp_i;
    SweepFlags sp_sweep;
    spreading->add_option("--poly", sp_poly, "Polynomial JSON or path");
    spreading->add_option("--E", sp_e, "IntervalSet JSON or path");
    spreading->add_option("--I", sp_i, "Interval endpoints a b")->expected(2);
    spreading->add_option("--delta", sp_delta);
    spreading->add_option("--c", sp_c);
    spreading->add_option("--eps", sp_eps);
    spreading->add_option("--sweep", sp_sweep.count, "Run a random sweep of this many instances");
    spreading->add_option("--max-degree", sp_sweep.max_degree);
    spreading->add_option("--threads", sp_sweep.threads);

    // comparison
    auto* comparison = app.add_subcommand("comparison", "Comparison lemma certificates");
    std::string cp_poly, cp_delta, cp_t, cp_gamma;
    SweepFlags cp_sweep;
    comparison->add_option("--poly", cp_poly, "Polynomial JSON or path");
    comparison->add_option("--delta", cp_delta);
    comparison->add_option("--t", cp_t);
    comparison->add_option("--gamma", cp_gamma);
    comparison->add_flag("--no-kappa-gate", cp_sweep.no_gate, "Measure both sides even when the smallness gate fails");
    comparison->add_option("--sweep", cp_sweep.count, "Run a random sweep of this many instances");
    comparison->add_option("--threads", cp_sweep.threads);

    // theorem-a
    auto* theorem_a = app.add_subcommand("theorem-a", "Level-set decay scan");
    std::string ta_target;
    std::vector<int> ta_degrees = {2, 4, 16, 256};
    std::string ta_beta = "0.5", ta_eps = "0.25";
    bool ta_remez = false;
    theorem_a->add_option("--target", ta_target, "Target (default: lacunary model on --degrees)");
    theorem_a->add_option("--degrees", ta_degrees, "Comma separated degrees")->delimiter(',');
    theorem_a->add_option("--beta", ta_beta);
    theorem_a->add_option("--eps", ta_eps, "Gap-condition exponent");
    theorem_a->add_flag("--remez", ta_remez, "Compute E_n by exchange instead of the tail bound");

    // construct-b
    auto* construct_b = app.add_subcommand("construct-b", "Flat quasianalytic construction");
    std::string cb_phi = "inv_log", cb_psi = "exp_neg2";
    int cb_stages = 3;
    construct_b->add_option("--phi", cb_phi, "inv_log, inv, exp_neg, exp_neg2");
    construct_b->add_option("--psi", cb_psi, "inv_log, inv, exp_neg, exp_neg2");
    construct_b->add_option("--stages", cb_stages)->check(CLI::PositiveNumber);

    // calibrate-c1
    auto* calibrate = app.add_subcommand("calibrate-c1", "Measure the constants bounded by C1");
    int cal_n = 21, cal_l = 30;
    calibrate->add_option("--n-max", cal_n);
    calibrate->add_option("--l-max", cal_l);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Random property sweep");
    std::string sw_lemma = "spreading";
    SweepFlags sw;
    sw.count = 500;
    sweep->add_option("--lemma", sw_lemma)->check(CLI::IsMember(sweep_lemmas()));
    sweep->add_option("--count", sw.count);
    sweep->add_option("--max-degree", sw.max_degree);
    sweep->add_option("--threads", sw.threads);
    sweep->add_flag("--no-kappa-gate", sw.no_gate, "Claim/comparison: measure without the smallness gate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return kOk;
        std::cerr << app.help();
        return kInput;
    }

    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        auto given = [&](const char* flag) { return app.count(flag) > 0; };
        if (given("--precision")) cfg.precision_bits = precision;
        if (given("--tol")) cfg.tolerance = tol;
        if (given("--seed")) cfg.seed = seed;
        if (given("--degree-cap")) cfg.degree_cap = degree_cap;
        if (given("--c1")) cfg.c1 = c1;
        if (given("--out")) cfg.output_dir = out;
        if (given("--format")) cfg.format = parse_format(format);
        cfg.validate();
    } catch (const Error& e) {
        std::cerr << "lacuna: " << e.what() << '\n';
        return kInput;
    }

    auto need = [](const std::string& v, const char* flag) -> Real {
        if (v.empty()) throw Error(ErrorKind::InvalidArgument, std::string("missing ") + flag);
        return Real(v);
    };
    const Real tolerance(cfg.tolerance);

    if (*approx) {
        return guarded("approx", cfg, [&] {
            const TargetFunction f = load_target(target);
            const auto results = approx_sequence(f, degrees, tolerance);
            json doc = {{"target", f.to_json()}, {"config", cfg.to_json()}, {"results", json::array()}};
            bool ok = true;
            for (const auto& r : results) {
                doc["results"].push_back(approx_json(r));
                ok &= r.converged;
                std::cout << "E_" << r.n << " = " << r.error.str(20) << (r.converged ? "" : " (not converged)") << '\n';
            }
            announce(emit_report("approx", doc, approx_csv(results), cfg));
            return ok ? kOk : kFail;
        });
    }
    if (*levelset) {
        return guarded("levelset", cfg, [&] {
            if (!lv_poly.empty()) {
                const Poly p = Poly::from_json(load_json(lv_poly));
                IntervalSet set;
                json doc = {{"poly", p.to_json()}};
                if (!lv_delta.empty()) {
                    set = e_set(p, Real(lv_delta));
                    doc["delta"] = lv_delta;
                } else {
                    const auto r = poly_sublevel(p, need(lv_threshold, "--threshold or --delta"));
                    set = r.set;
                    doc["threshold"] = lv_threshold;
                    doc["degenerate"] = r.degenerate;
                }
                doc["set"] = set.to_json();
                std::cout << set.size() << " intervals, total length " << set.total_length().str(20) << '\n';
                announce(emit_report("levelset", doc, set.to_csv(), cfg));
                return kOk;
            }
            if (lv_target.empty()) throw Error(ErrorKind::InvalidArgument, "levelset needs --poly or --target");
            const TargetFunction f = load_target(lv_target);
            const Real t = need(lv_threshold, "--threshold");
            const auto m = measure_sublevel(f, t, tolerance);
            const json doc = {{"target", f.to_json()},  {"threshold", lv_threshold}, {"lower", s30(m.lower)},
                              {"upper", s30(m.upper)}, {"cells", m.cells},           {"budget_exceeded", m.budget_exceeded}};
            std::cout << "m_f(t) in [" << m.lower.str(20) << ", " << m.upper.str(20) << "]\n";
            announce(emit_report("levelset", doc, "t,m_lower,m_upper\n" + lv_threshold + "," + s30(m.lower) + "," + s30(m.upper) + "\n", cfg));
            return m.budget_exceeded ? kFail : kOk;
        });
    }
    if (*spreading) {
        return guarded("spreading", cfg, [&] {
            if (sp_sweep.count > 0) return run_sweep_cmd("spreading", sp_sweep, cfg);
            if (sp_poly.empty() || sp_e.empty() || sp_i.size() != 2)
                throw Error(ErrorKind::InvalidArgument, "spreading needs --poly, --E and --I, or --sweep");
            const Poly p = Poly::from_json(load_json(sp_poly));
            PrecisionScope scope(std::max<long>(cfg.precision_bits, p.work_bits()));
            const auto cert = spreading_check(p, IntervalSet::from_json(load_json(sp_e)), Interval{Real(sp_i[0]), Real(sp_i[1])},
                                              need(sp_delta, "--delta"), need(sp_c, "--c"), need(sp_eps, "--eps"));
            return emit_certificates("spreading", {cert}, cfg);
        });
    }
    if (*comparison) {
        return guarded("comparison", cfg, [&] {
            if (cp_sweep.count > 0) return run_sweep_cmd("comparison", cp_sweep, cfg);
            if (cp_poly.empty()) throw Error(ErrorKind::InvalidArgument, "comparison needs --poly or --sweep");
            const Poly p = Poly::from_json(load_json(cp_poly));
            PrecisionScope scope(std::max<long>(cfg.precision_bits, p.work_bits()));
            const auto cert = comparison_check(p, need(cp_delta, "--delta"), need(cp_t, "--t"), need(cp_gamma, "--gamma"),
                                               std::nullopt, !cp_sweep.no_gate);
            return emit_certificates("comparison", {cert}, cfg);
        });
    }
    if (*theorem_a) {
        return guarded("theorem-a", cfg, [&] {
            const TargetFunction f = ta_target.empty() ? lacunary_model(ta_degrees) : load_target(ta_target);
            ScanOptions opts;
            opts.eps = Real(ta_eps);
            opts.tail_bound_mode = !ta_remez;
            opts.remez_tol = tolerance;
            const ScanTable table = theorem_a_scan(f, ta_degrees, Real(ta_beta), opts);
            json doc = table.to_json();
            doc["target"] = f.to_json();
            doc["config"] = cfg.to_json();
            announce(emit_report("theorem_a", doc, table.to_csv(), cfg));
            bool ok = table.ratios_increasing();
            for (const auto& c : table.steps) ok &= c.pass;
            std::cout << "ratios increasing: " << (table.ratios_increasing() ? "yes" : "no") << ", " << table.steps.size()
                      << " step certificates\n";
            return ok ? kOk : kFail;
        });
    }
    if (*construct_b) {
        return guarded("construct-b", cfg, [&] {
            const auto state = build_theorem_b(named_function(cb_phi), named_function(cb_psi), cb_stages, Real(cfg.c1),
                                               cfg.degree_cap);
            json doc = state.to_json();
            doc["config"] = cfg.to_json();
            announce(emit_report("construct_b", doc, state.to_csv(), cfg));
            std::cout << state.stages.size() << " of " << cb_stages << " stages built";
            if (state.failure) std::cout << "; stopped: " << *state.failure;
            std::cout << '\n';
            return state.all_pass() && static_cast<int>(state.stages.size()) == cb_stages ? kOk : kFail;
        });
    }
    if (*calibrate) {
        return guarded("calibrate-c1", cfg, [&] {
            const auto report = calibrate_c1(Real(cfg.c1), cal_n, cal_l);
            json doc = report.to_json();
            doc["config"] = cfg.to_json();
            announce(emit_report("calibrate_c1", doc, report.to_csv(), cfg));
            for (const auto& e : report.entries)
                std::cout << e.name << ": measured " << e.measured.str(8) << " limit " << e.limit.str(8)
                          << (e.sufficient ? " ok" : " INSUFFICIENT") << '\n';
            return report.sufficient() ? kOk : kFail;
        });
    }
    return guarded("sweep", cfg, [&] { return run_sweep_cmd(sw_lemma, sw, cfg); });
}
