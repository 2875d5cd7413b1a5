#include "lacuna/sweeps.hpp"

#include "lacuna/errors.hpp"
#include "lacuna/sublevel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace lacuna {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

InstanceRng::InstanceRng(std::uint64_t seed, std::uint64_t id) : gen_(splitmix64(seed ^ splitmix64(id))) {}

double InstanceRng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

int InstanceRng::integer(int lo, int hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
}

Poly random_unit_poly(InstanceRng& rng, int degree, long bits)
{
    std::vector<Real> c;
    c.reserve(degree + 1);
    for (int k = 0; k <= degree; ++k) c.emplace_back(rng.uniform(-1.0, 1.0));
    const Poly p = Poly::from_chebyshev(std::move(c), bits);
    PrecisionScope scope(p.work_bits());
    const Real norm = sup_norm(p, ldexp(Real(1), -40)).upper;
    return (Real(1) / norm) * p;
}

const std::vector<std::string>& sweep_lemmas()
{
    static const std::vector<std::string> names = {"vmarkov", "remez", "spreading", "claim", "comparison"};
    return names;
}

void parallel_for(int count, int threads, long bits, const std::function<void(int)>& fn)
{
    if (count <= 0) return;
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, count);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        PrecisionScope scope(bits);
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

namespace {

std::string s20(const Real& x) { return x.is_finite() ? x.str(20) : std::string(); }

void from_certificate(SweepRecord& r, const Certificate& cert)
{
    r.claimed = cert.claimed;
    r.measured = cert.measured;
    r.slack = cert.slack;
    r.pass = cert.pass;
    r.status = cert.pass ? "pass" : "fail";
    r.certificate = cert.to_json();
}

SweepRecord vmarkov_instance(InstanceRng& rng, int max_deg, const RunConfig& cfg)
{
    SweepRecord r;
    const int n = rng.integer(1, max_deg);
    const Poly p = random_unit_poly(rng, n, cfg.precision_bits);
    PrecisionScope scope(p.work_bits());
    const Real norm = sup_norm(p, ldexp(Real(1), -40)).upper;
    // Worst ratio ||P^(k+1)|| / bound over k < n; a violation needs the lower end above the bound.
    Real worst_ratio(0);
    int worst_k = 0;
    bool violated = false, decided = true;
    Poly d = p;
    for (int k = 0; k < n; ++k) {
        d = derivative(d);
        const Real bound = vmarkov_bound(n, k, norm);
        const NormResult m = sup_norm(d, bound * Real(1e-12));
        const Real ratio = m.upper / bound;
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_k = k;
        }
        if (m.lower > bound) violated = true;
        else if (m.upper > bound) decided = false;
    }
    r.claimed = Real(1);
    r.measured = worst_ratio;
    r.pass = !violated && decided;
    r.status = r.pass ? "pass" : "fail";
    r.params = {{"degree", n}, {"norm", s20(norm)}, {"worst_k", worst_k}, {"p", p.to_json()}};
    if (!decided && !violated) r.message = "undecided within tolerance";
    return r;
}

SweepRecord remez_instance(InstanceRng& rng, int max_deg, const RunConfig& cfg)
{
    SweepRecord r;
    const int n = rng.integer(1, max_deg);
    const Poly p = random_unit_poly(rng, n, cfg.precision_bits);
    PrecisionScope scope(p.work_bits());
    const double len = rng.uniform(0.05, 2.0);
    const double a = -1.0 + rng.uniform() * (2.0 - len);
    const Real ia(a), ib = min(Real(a) + Real(len), Real(1));
    const int pieces = rng.integer(1, 3);
    std::vector<Interval> ev;
    for (int k = 0; k < pieces; ++k) {
        const double u = rng.uniform(), v = rng.uniform();
        const double lo = std::min(u, v), hi = std::max(u, v);
        ev.push_back({ia + (ib - ia) * Real(lo), ia + (ib - ia) * Real(hi)});
    }
    const IntervalSet e(std::move(ev));
    const IntervalSet i = IntervalSet::single(ia, ib);
    const Real factor = crude_remez_bound(n, e.total_length(), ib - ia);
    const NormResult ne = sup_norm(p, e, ldexp(Real(1), -60));
    const Real bound = factor * ne.lower;
    const NormResult ni = sup_norm(p, i, bound * Real(1e-12));
    r.claimed = bound;
    r.measured = ni.upper;
    r.pass = ni.upper <= bound;
    r.status = r.pass ? "pass" : "fail";
    r.params = {{"degree", n}, {"I", {ia.str(20), ib.str(20)}}, {"E", e.to_json()}, {"p", p.to_json()}};
    return r;
}

// Largest eps below (1-c)/(2-c) for which kappa is defined at the (delta, c) corner.
std::pair<double, double> admissible_eps(double delta, double c)
{
    double eps = 0.9 * (1.0 - c) / (2.0 - c);
    for (int k = 0; k < 12; ++k, eps *= 0.5) {
        try {
            return {eps, log_kappa(delta, eps, c)};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoFeasible) throw;
        }
    }
    throw Error(ErrorKind::NoFeasible, "no admissible eps");
}

SweepRecord spreading_instance(InstanceRng& rng, int max_deg, const RunConfig& cfg)
{
    SweepRecord r;
    const int n = rng.integer(1, max_deg);
    const double c = rng.uniform(0.5, 0.9);
    const double delta = rng.uniform(0.5, 1.0);
    const auto [eps, lk] = admissible_eps(delta, c);

    // A polynomial without a zero in [-1,1] may have an empty sublevel set; redraw it.
    Poly p;
    IntervalSet sub;
    int redraws = 0;
    for (;; ++redraws) {
        p = random_unit_poly(rng, n, cfg.precision_bits);
        PrecisionScope scope(p.work_bits());
        sub = e_set(p, Real(delta));
        if (!sub.empty()) break;
        if (redraws >= 50) throw Error(ErrorKind::EmptySet, "no polynomial with a nonempty sublevel set");
    }
    PrecisionScope scope(p.work_bits());

    // E: a short interval, below half of kappa, inside the middle of one
    // component of the sublevel set; I: centred on E with |I| just under |E|^a.
    const auto& comps = sub.intervals();
    const Interval& comp = comps[static_cast<std::size_t>(rng.integer(0, static_cast<int>(comps.size()) - 1))];
    const Real clen = comp.length();
    const Real x = comp.a + clen * Real(0.1 + 0.8 * rng.uniform());
    Real len_e = exp(Real(lk)) * Real(0.05 + 0.45 * rng.uniform());
    len_e = min(len_e, clen * Real(0.1));
    const Real a = Real(1) / Real(2 - c) + Real(eps);
    const Real len_i = pow(len_e, a) * Real(0.999);
    const Real half_e = len_e / Real(2), half_i = len_i / Real(2);
    const IntervalSet e = IntervalSet::single(x - half_e, x + half_e);
    const Interval i{max(x - half_i, Real(-1)), min(x + half_i, Real(1))};

    r.params = {{"degree", n}, {"c", c}, {"delta", delta}, {"eps", eps}, {"log_kappa", lk}, {"redraws", redraws}};
    from_certificate(r, spreading_check(p, e, i, Real(delta), Real(c), Real(eps)));
    r.pass_slack4 = r.certificate["details"].value("pass_slack4", false);
    return r;
}

SweepRecord claim_instance(InstanceRng& rng, int max_deg, const RunConfig& cfg, bool enforce)
{
    SweepRecord r;
    const int n = rng.integer(1, max_deg);
    const double c = rng.uniform(0.5, 0.9);
    const double delta = rng.uniform(0.5, 1.0);
    const Poly p = random_unit_poly(rng, n, cfg.precision_bits);
    PrecisionScope scope(p.work_bits());
    const double eps = admissible_eps(delta, c).first;
    r.params = {{"degree", n}, {"c", c}, {"delta", delta}, {"eps", eps}};
    from_certificate(r, claim_check(p, Real(delta), Real(c), Real(eps), std::nullopt, 40, enforce));
    return r;
}

// Degrees are chosen so that delta*n clears the gate exponent; an instance
// that still misses the gate is redrawn with a higher degree.
SweepRecord comparison_instance(InstanceRng& rng, const RunConfig& cfg, bool enforce)
{
    SweepRecord r;
    const double t = rng.uniform(0.3, 0.7);
    const double gamma = rng.uniform(0.85, 0.99) * (1.0 - t);
    const double delta = rng.uniform(0.5, 1.0);
    const MEps me = select_m_eps(Real(t), Real(gamma));
    const double lk = log_kappa(std::min(1.0, t * delta), me.eps.to_double(), me.c.to_double());
    const double gate = lk / (t + gamma);
    int n = static_cast<int>(std::ceil((-gate + 4.0 + 8.0 * rng.uniform()) / delta));
    for (int attempt = 0;; ++attempt) {
        const Poly p = random_unit_poly(rng, n, cfg.precision_bits);
        try {
            PrecisionScope scope(p.work_bits());
            r.params = {{"degree", n}, {"t", t}, {"gamma", gamma}, {"delta", delta}, {"redraws", attempt}};
            from_certificate(r, comparison_check(p, Real(delta), Real(t), Real(gamma), std::nullopt, enforce));
            return r;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::KappaFail || attempt >= 8) throw;
            n += 8;
        }
    }
}

int default_degree(const std::string& lemma)
{
    if (lemma == "vmarkov" || lemma == "remez") return 30;
    return 40;
}

}  // namespace

int SweepResult::count(const std::string& status) const
{
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [&](const SweepRecord& r) { return r.status == status; }));
}

int SweepResult::pass_slack4() const
{
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const SweepRecord& r) { return r.pass_slack4; }));
}

nlohmann::json SweepResult::summary() const
{
    const int evaluated = count("pass") + count("fail");
    nlohmann::json j = {{"lemma", lemma},
                        {"seed", seed},
                        {"instances", records.size()},
                        {"evaluated", evaluated},
                        {"pass", count("pass")},
                        {"fail", count("fail")},
                        {"skipped", count("skipped")},
                        {"error", count("error")}};
    if (lemma == "spreading") {
        j["pass_slack2"] = count("pass");
        j["pass_slack4"] = pass_slack4();
    }
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& r : records) {
        if (r.status == "pass") continue;
        nlohmann::json f = {{"instance_id", r.id}, {"status", r.status}, {"params", r.params}};
        if (!r.message.empty()) f["message"] = r.message;
        if (r.certificate.is_object()) f["details"] = r.certificate["details"];
        flagged.push_back(f);
    }
    j["non_passing"] = flagged;
    return j;
}

std::string SweepResult::to_csv() const
{
    std::ostringstream os;
    os << "instance_id,lemma,claimed,measured,slack,pass\n";
    for (const auto& r : records) {
        const bool evaluated = r.status == "pass" || r.status == "fail";
        os << r.id << ',' << r.lemma << ',' << (evaluated ? s20(r.claimed) : "") << ','
           << (evaluated ? s20(r.measured) : "") << ',' << (evaluated ? s20(r.slack) : "") << ','
           << (evaluated ? (r.pass ? "true" : "false") : r.status) << '\n';
    }
    return os.str();
}

std::string SweepResult::to_jsonl() const
{
    std::vector<nlohmann::json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        nlohmann::json j = {{"instance_id", r.id}, {"lemma", r.lemma}, {"status", r.status}, {"params", r.params}};
        if (r.certificate.is_object()) j["certificate"] = r.certificate;
        else if (r.status == "pass" || r.status == "fail")
            j["result"] = {{"claimed", s20(r.claimed)}, {"measured", s20(r.measured)}, {"pass", r.pass}};
        if (!r.message.empty()) j["message"] = r.message;
        rows.push_back(std::move(j));
    }
    return lacuna::to_jsonl(rows);
}

SweepResult run_sweep(const SweepOptions& opts, const RunConfig& cfg)
{
    cfg.validate();
    const auto& names = sweep_lemmas();
    if (std::find(names.begin(), names.end(), opts.lemma) == names.end())
        throw Error(ErrorKind::InvalidArgument, "unknown sweep lemma '" + opts.lemma + "'");
    if (opts.count < 0) throw Error(ErrorKind::InvalidArgument, "sweep count must be non-negative");
    const int max_deg = opts.max_degree > 0 ? opts.max_degree : default_degree(opts.lemma);

    SweepResult res;
    res.lemma = opts.lemma;
    res.seed = cfg.seed;
    res.records.resize(static_cast<std::size_t>(opts.count));
    parallel_for(opts.count, opts.threads, cfg.precision_bits, [&](int id) {
        InstanceRng rng(cfg.seed, static_cast<std::uint64_t>(id));
        SweepRecord r;
        try {
            if (opts.lemma == "vmarkov") r = vmarkov_instance(rng, max_deg, cfg);
            else if (opts.lemma == "remez") r = remez_instance(rng, max_deg, cfg);
            else if (opts.lemma == "spreading") r = spreading_instance(rng, max_deg, cfg);
            else if (opts.lemma == "claim") r = claim_instance(rng, max_deg, cfg, opts.enforce_kappa);
            else r = comparison_instance(rng, cfg, opts.enforce_kappa);
        } catch (const Error& e) {
            r = SweepRecord{};
            r.status = e.kind() == ErrorKind::KappaFail ? "skipped" : "error";
            r.message = e.what();
        }
        r.id = id;
        r.lemma = opts.lemma;
        res.records[static_cast<std::size_t>(id)] = std::move(r);
    });
    return res;
}

std::vector<std::filesystem::path> emit_sweep(const SweepResult& r, const RunConfig& cfg)
{
    nlohmann::json doc = r.summary();
    doc["config"] = cfg.to_json();
    const std::string stem = "sweep_" + r.lemma;
    auto written = emit_report(stem, doc, r.to_csv(), cfg);
    if (cfg.wants_json()) {
        auto p = cfg.output_dir / (stem + ".jsonl");
        write_atomic(p, r.to_jsonl());
        written.push_back(p);
    }
    return written;
}

}  // namespace lacuna
