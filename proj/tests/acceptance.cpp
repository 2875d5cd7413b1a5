// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include "lacuna/bestapprox.hpp"
#include "lacuna/flatbuild.hpp"
#include "lacuna/lemmas.hpp"
#include "lacuna/report.hpp"
#include "lacuna/sublevel.hpp"
#include "lacuna/sweeps.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace lacuna;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const Real& x, int digits = 6) { return x.str(digits); }

Outcome sweep_outcome(const SweepResult& r, std::ostringstream& os)
{
    os << r.records.size() << " instances, " << r.count("pass") << " pass, " << r.count("fail") << " fail, "
       << r.count("error") << " error";
    return {r.count("pass") == static_cast<int>(r.records.size()), ""};
}

SweepResult sweep(const std::string& lemma, int count, std::uint64_t seed)
{
    RunConfig cfg;
    cfg.seed = seed;
    SweepOptions o;
    o.lemma = lemma;
    o.count = count;
    return run_sweep(o, cfg);
}

Outcome c1_best_approx()
{
    const Real tol("1e-40");
    const auto abs1 = remez_exchange(TargetFunction::builtin("abs"), 1, tol);
    const auto sq1 = remez_exchange(TargetFunction::polynomial({Real(0), Real(0), Real(1)}), 1, tol);
    bool ok = abs(abs1.error - Real("0.5")) <= Real("1e-10") && abs(sq1.error - Real("0.5")) <= Real("1e-10");

    // Every exchange run: n + 2 points where the residual alternates at full size.
    int runs = 0, equi = 0;
    auto check = [&](const TargetFunction& f, const ApproxResult& r) {
        ++runs;
        bool good = r.converged && static_cast<int>(r.alternation_points.size()) == r.n + 2;
        int prev_sign = 0;
        for (const auto& x : r.alternation_points) {
            if (!good) break;
            const Real res = f(x) - r.best_poly(x);
            const int s = res.sign();
            good = s != 0 && s != prev_sign && abs(abs(res) - r.error) <= r.error * Real("1e-8");
            prev_sign = s;
        }
        if (good) ++equi;
    };
    check(TargetFunction::builtin("abs"), abs1);
    check(TargetFunction::polynomial({Real(0), Real(0), Real(1)}), sq1);
    for (const char* name : {"abs", "exp", "runge"}) {
        const auto f = TargetFunction::builtin(name);
        for (int n : {2, 3, 4, 6}) check(f, remez_exchange(f, n, Real("1e-20")));
    }
    ok &= equi == runs;
    std::ostringstream os;
    os << "E_1(|x|)=" << fmt(abs1.error, 12) << " E_1(x^2)=" << fmt(sq1.error, 12) << "; equioscillation " << equi << "/"
       << runs << " runs";
    return {ok, os.str()};
}

Outcome c2_vmarkov()
{
    std::ostringstream os;
    const auto r = sweep("vmarkov", 500, 2);
    os << "V. Markov: ";
    auto o = sweep_outcome(r, os);
    return {o.pass, os.str()};
}

Outcome c3_remez()
{
    std::ostringstream os;
    const auto r = sweep("remez", 500, 3);
    os << "crude Remez: ";
    auto o = sweep_outcome(r, os);
    return {o.pass, os.str()};
}

Outcome c4_sublevel()
{
    Real worst(0);
    for (int n : {2, 5, 10, 25}) {
        const Poly p = Poly::power(n);
        for (const char* d : {"0.25", "0.5", "1", "2"}) {
            const Real delta(d);
            worst = max(worst, abs(e_set(p, delta).total_length() - Real(2) * exp(-delta)));
        }
    }
    const Poly t2 = Poly::chebyshev_t(2);
    Real worst_t2(0);
    for (const char* ts : {"0.1", "0.5", "0.9"}) {
        const Real t(ts);
        const Real closed = Real(2) * (sqrt((Real(1) + t) / Real(2)) - sqrt((Real(1) - t) / Real(2)));
        worst_t2 = max(worst_t2, abs(poly_sublevel(t2, t).set.total_length() - closed));
    }
    std::ostringstream os;
    os << "max |e_set(x^n)| error " << fmt(worst, 3) << ", max T_2 error " << fmt(worst_t2, 3);
    return {worst <= Real("1e-9") && worst_t2 <= Real("1e-9"), os.str()};
}

Outcome c5_spreading()
{
    const auto r = sweep("spreading", 500, 5);
    const int n = static_cast<int>(r.records.size());
    const int s2 = r.count("pass"), s4 = r.pass_slack4();
    std::ostringstream os;
    os << n << " instances, slack 2: " << s2 << ", slack 4: " << s4 << ", errors: " << r.count("error");
    return {n == 500 && s4 == n && s2 * 100 >= 99 * n, os.str()};
}

Outcome c6_comparison()
{
    std::ostringstream os;
    const auto r = sweep("comparison", 500, 6);
    int gated = 0;
    for (const auto& rec : r.records)
        if (rec.certificate.is_object() && rec.certificate["details"].value("kappa_gate", false)) ++gated;
    auto o = sweep_outcome(r, os);
    os << ", " << gated << " admissible under the kappa gate";
    return {o.pass && gated == static_cast<int>(r.records.size()), os.str()};
}

Outcome c7_theorem_a()
{
    const std::vector<int> degrees = {2, 4, 16, 256};
    const ScanTable t = theorem_a_scan(lacunary_model(degrees), degrees, Real("0.5"));
    std::ostringstream os;
    os << "ratios:";
    int with_ratio = 0;
    for (const auto& row : t.rows) {
        if (!row.ratio_lo) continue;
        ++with_ratio;
        os << " [" << fmt(*row.ratio_lo, 5) << ", " << fmt(*row.ratio_hi, 5) << "]";
    }
    os << "; strictly increasing: " << (t.ratios_increasing() ? "yes" : "no");
    return {t.ratios_increasing() && with_ratio >= 2, os.str()};
}

Outcome c8_lemma_surrogates()
{
    const auto rep = calibrate_c1(Real(8), 21, 30);
    auto get = [&](const std::string& name) -> const CalibrationEntry& {
        for (const auto& e : rep.entries)
            if (e.name == name) return e;
        throw std::runtime_error("missing calibration entry " + name);
    };
    const auto& grid = get("u_bound");
    const auto& flat = get("lemma_flatness");
    const auto& ident = get("u_chebyshev_identity");
    std::ostringstream os;
    os << "grid bound (odd n<=99): " << (grid.sufficient ? "ok" : "violated") << " (max ratio " << fmt(grid.measured, 8)
       << "); |t+R_{n,l}| constant " << fmt(flat.measured, 4) << " vs C1=8 " << (flat.sufficient ? "ok" : "exceeded")
       << " (" << flat.detail << "); u_n = +-T_n: " << (ident.sufficient ? "exact" : "differs");
    return {grid.sufficient && flat.sufficient && ident.sufficient, os.str()};
}

Outcome c9_theorem_b()
{
    const auto st = build_theorem_b(named_function("inv_log"), named_function("exp_neg2"), 3, Real(8), 20000);
    std::ostringstream os;
    os << st.stages.size() << "/3 stages, degrees";
    for (const auto& s : st.stages) os << ' ' << s.n;
    os << "; certificates " << (st.all_pass() ? "all pass" : "not all pass");
    if (st.failure) os << "; stopped: " << *st.failure;
    return {st.stages.size() == 3 && st.all_pass() && !st.failure, os.str()};
}

Outcome c10_beurling()
{
    constexpr int kN = 10000;
    const Real beta("0.7");
    std::vector<Real> errors;
    errors.reserve(kN);
    for (int n = 1; n <= kN; ++n) errors.push_back(exp(-beta * Real(n)));
    const Real sum = beurling_partial_sum(errors, kN);
    Real h(0);
    for (int n = kN; n >= 1; --n) h += Real(1) / Real(n);
    const Real diff = abs(sum - beta * h);
    std::ostringstream os;
    os << "partial sum " << fmt(sum, 15) << ", beta*H_N " << fmt(beta * h, 15) << ", difference " << fmt(diff, 3);
    return {diff <= Real("1e-12"), os.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome c11_determinism()
{
    const auto base = std::filesystem::temp_directory_path() / "lacuna_acceptance_determinism";
    std::filesystem::remove_all(base);
    int files = 0, identical = 0;
    for (const std::string lemma : {"spreading", "comparison", "remez"}) {
        for (int run = 0; run < 2; ++run) {
            RunConfig cfg;
            cfg.seed = 2024;
            cfg.output_dir = base / (lemma + std::to_string(run));
            SweepOptions o;
            o.lemma = lemma;
            o.count = 40;
            o.threads = run == 0 ? 1 : 4;
            emit_sweep(run_sweep(o, cfg), cfg);
        }
        for (const char* ext : {".json", ".csv", ".jsonl"}) {
            const std::string name = "sweep_" + lemma + ext;
            ++files;
            if (slurp(base / (lemma + "0") / name) == slurp(base / (lemma + "1") / name)) ++identical;
        }
    }
    std::filesystem::remove_all(base);
    std::ostringstream os;
    os << identical << "/" << files << " report files bitwise identical across runs (1 vs 4 threads)";
    return {identical == files, os.str()};
}

struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all = {
        {1, "best approximation oracles", 5, c1_best_approx},
        {2, "V. Markov certificate", 60, c2_vmarkov},
        {3, "crude Remez certificate", 120, c3_remez},
        {4, "sublevel-set oracles", 5, c4_sublevel},
        {5, "spreading lemma sweep", 600, c5_spreading},
        {6, "comparison lemma sweep", 600, c6_comparison},
        {7, "level-set decay scan", 300, c7_theorem_a},
        {8, "flat-construction lemma surrogates", 300, c8_lemma_surrogates},
        {9, "flat construction, 3 stages", 900, c9_theorem_b},
        {10, "Beurling diagnostic", 1, c10_beurling},
        {11, "determinism", 600, c11_determinism},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    PrecisionScope scope(256);
    int failed = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.limit_s);
        std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " [" << c.title << "] " << o.detail << " ("
                  << timing << (in_time ? "" : ", over time limit") << ")" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
