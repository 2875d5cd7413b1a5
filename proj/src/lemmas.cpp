#include "lacuna/lemmas.hpp"

#include "lacuna/bestapprox.hpp"
#include "lacuna/errors.hpp"
#include "lacuna/sublevel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace lacuna {

// ---- kappa ---------------------------------------------------------------

KappaConditions kappa_conditions(double log_len_e, double log_len_i, double delta, double c)
{
    KappaConditions out;
    const double log_delta = std::log(delta);
    const double log_a = 2 * log_delta - 1 - log_len_i;
    if (!(log_a > 1)) return out;
    const double log_b = log_a - 2 * std::log(log_a);
    if (!(log_b > 0)) return out;
    out.defined = true;
    const double lhs = (2 - c) / (1 - c) * log_len_i + 2 * std::log(log_a);
    const double rhs = 2 * log_delta - std::log(4.0) / (1 - c) - 1 + log_len_e / (1 - c);
    out.i = lhs <= rhs;
    out.ii = log_b * log_b <= log_a * log_a;
    out.iii = 2 * std::log(log_b) <= 2 + log_a;
    return out;
}

namespace {

constexpr double kLogKappaFloor = -1e4;

bool kappa_feasible(double log_len_e, double delta0, double eps, double c0)
{
    constexpr int kC = 24, kDelta = 12, kLen = 12;
    const double c_max = (1 - 2 * eps) / (1 - eps);
    for (int ic = 0; ic <= kC; ++ic) {
        // c ranges over [c0, c_max); the last sample sits just below c_max
        const double frac = ic < kC ? static_cast<double>(ic) / kC : 1 - 1e-9;
        const double c = c0 + (c_max - c0) * frac;
        const double a = 1 / (2 - c) + eps;
        for (int id = 0; id < kDelta; ++id) {
            const double delta = delta0 + (1 - delta0) * id / (kDelta - 1);
            for (int il = 0; il < kLen; ++il) {
                const double log_len_i = log_len_e + (a - 1) * log_len_e * il / (kLen - 1);
                if (!kappa_conditions(log_len_e, log_len_i, delta, c).all()) return false;
            }
        }
    }
    return true;
}

void check_kappa_args(double delta0, double eps, double c0)
{
    if (!(delta0 > 0 && delta0 <= 1)) throw Error(ErrorKind::InvalidArgument, "delta0 must lie in (0,1]");
    if (!(c0 > 0 && c0 < 1)) throw Error(ErrorKind::InvalidArgument, "c0 must lie in (0,1)");
    if (!(eps > 0 && eps < (1 - c0) / (2 - c0))) {
        throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, (1-c0)/(2-c0))");
    }
}

}  // namespace

double log_kappa(double delta0, double eps, double c0)
{
    check_kappa_args(delta0, eps, c0);
    if (!kappa_feasible(kLogKappaFloor, delta0, eps, c0)) {
        throw Error(ErrorKind::NoFeasible, "side conditions fail even at |E| = e^-10000");
    }
    double lo = kLogKappaFloor, hi = 0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            if (kappa_feasible(mid, delta0, eps, c0)) lo = mid;
            else hi = mid;
        }
        // Feasibility is not assumed monotone: probe below the bisection result.
        double bad = 0;
        for (int k = 1; k <= 16 && bad == 0; ++k) {
            const double probe = lo - std::log(2.0) * k - 0.05 * std::fabs(lo) * k;
            if (probe > kLogKappaFloor && !kappa_feasible(probe, delta0, eps, c0)) bad = probe;
        }
        if (bad == 0) return lo;
        hi = bad;
        lo = kLogKappaFloor;
    }
    throw Error(ErrorKind::NoFeasible, "no stable feasible region below the bisection point");
}

Real kappa(const Real& delta0, const Real& eps, const Real& c0)
{
    return exp(Real(log_kappa(delta0.to_double(), eps.to_double(), c0.to_double())));
}

// ---- certificates --------------------------------------------------------

nlohmann::json Certificate::to_json() const
{
    return {{"schema_version", kSchemaVersion},
            {"lemma", lemma},
            {"inputs", inputs},
            {"claimed_bound", claimed.str(30)},
            {"measured_value", measured.str(30)},
            {"slack_factor", slack.str(30)},
            {"pass", pass},
            {"notes", notes},
            {"details", details}};
}

Certificate Certificate::from_json(const nlohmann::json& j)
{
    if (j.value("schema_version", 0) != kSchemaVersion) throw Error(ErrorKind::InvalidArgument, "unsupported certificate schema");
    Certificate c;
    c.lemma = j.at("lemma").get<std::string>();
    c.inputs = j.at("inputs");
    c.claimed = Real(j.at("claimed_bound").get<std::string>());
    c.measured = Real(j.at("measured_value").get<std::string>());
    c.slack = Real(j.at("slack_factor").get<std::string>());
    c.pass = j.at("pass").get<bool>();
    c.notes = j.value("notes", "");
    c.details = j.value("details", nlohmann::json::object());
    return c;
}

namespace {

Real read_real(const nlohmann::json& v) { return v.is_string() ? Real(v.get<std::string>()) : Real(v.get<double>()); }

std::string s30(const Real& x) { return x.str(30); }

// Allowance for the sublevel endpoint accuracy when testing ||p||_E <= bound.
Real hypothesis_tolerance(const Real& bound) { return ldexp(bound, -16); }

Real log_len(const Real& len) { return len.is_zero() ? -Real::infinity() : log(len); }

Poly normalized(const Poly& p)
{
    if (p.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "zero polynomial");
    PrecisionScope scope(p.work_bits());
    Real scale(0);
    for (const auto& c : p.cheb()) scale += abs(c);
    const auto norm = sup_norm(p, ldexp(scale, -(p.precision_bits() / 2)));
    return (Real(1) / norm.upper) * p;
}

}  // namespace

namespace {

Certificate spreading_impl(const Poly& p, const IntervalSet& e, const Interval& iv, const Real& delta, const Real& c,
                           const Real& eps, const std::optional<Floors>& floors, bool check_norm)
{
    if (!(c > Real(0) && c < Real(1))) throw Error(ErrorKind::InvalidArgument, "c must lie in (0,1)");
    if (!(eps > Real(0) && eps < (Real(1) - c) / (Real(2) - c))) {
        throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, (1-c)/(2-c))");
    }
    if (!(delta > Real(0))) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
    if (e.empty()) throw Error(ErrorKind::EmptySet, "E is empty");
    const int n = p.degree();
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "degree must be at least 1");
    PrecisionScope scope(p.work_bits());
    if (check_norm && !norm_at_most(p, IntervalSet::full(), Real(1) + hypothesis_tolerance(Real(1)))) {
        throw Error(ErrorKind::InvalidArgument, "||p|| on [-1,1] must be at most 1");
    }
    if (iv.a < Real(-1) || iv.b > Real(1) || !(iv.a < iv.b)) throw Error(ErrorKind::GeometryFail, "I must be a subinterval of [-1,1]");
    const Interval hull = e.hull();
    if (!iv.contains(hull)) throw Error(ErrorKind::GeometryFail, "E is not contained in I");

    // delta > 1 is absorbed into a larger degree with the same e^(-delta n).
    long n_eff = n;
    Real delta_eff = delta;
    if (delta > Real(1)) {
        n_eff = ceil(delta * Real(n)).to_long();
        delta_eff = delta * Real(n) / Real(n_eff);
    }
    const Real delta0 = floors ? floors->delta0 : delta_eff;
    const Real c0 = floors ? floors->c0 : c;
    if (delta0 > delta_eff || c0 > c) throw Error(ErrorKind::InvalidArgument, "floors must not exceed delta and c");

    const Real dn = delta * Real(n);
    const Real hyp_bound = exp(-dn);
    const Real tau = hypothesis_tolerance(hyp_bound);
    if (!norm_at_most(p, e, hyp_bound + tau)) {
        throw Error(ErrorKind::HypothesisFail, "||p||_E exceeds e^(-delta n)");
    }

    const double lk = log_kappa(delta0.to_double(), eps.to_double(), c0.to_double());
    const Real len_e = e.total_length();
    const Real len_i = iv.length();
    const Real a = Real(1) / (Real(2) - c) + eps;
    if (!(log_len(len_e) < Real(lk))) throw Error(ErrorKind::GeometryFail, "|E| is not below kappa");
    if (len_i > pow(len_e, a)) throw Error(ErrorKind::GeometryFail, "|I| exceeds |E|^(1/(2-c)+eps)");

    const Real e_const = Real::euler();
    const Real big_a = delta_eff * delta_eff / (e_const * len_i);
    const Real log_a = log(big_a);
    const Real big_b = big_a / (log_a * log_a);
    const Real lambda = delta_eff / log(big_b);
    const long k = floor(lambda * Real(n_eff)).to_long();
    const Real eta = len_i / len_e;
    const Real log4eta = log(Real(4) * eta);
    const Real ne(n_eff);

    nlohmann::json checks;
    auto record = [&](const char* name, const Real& lhs, const Real& rhs, bool ok) {
        checks[name] = {{"lhs", s30(lhs)}, {"rhs", s30(rhs)}, {"holds", ok}};
        return ok;
    };
    bool conds = true;
    {
        const Real lhs = Real(k) * log4eta, rhs = delta_eff * (Real(1) - c) * ne;
        conds &= record("power_growth", lhs, rhs, lhs <= rhs);
    }
    {
        const Real kp1(k + 1);
        const Real lhs = kp1 * log(e_const * len_i * ne * ne / (kp1 * kp1)), rhs = -delta_eff * ne;
        conds &= record("taylor_remainder", lhs, rhs, lhs <= rhs);
    }
    {
        const Real rhs = delta_eff * (Real(1) - c) / log4eta;
        conds &= record("lambda_upper", lambda, rhs, lambda <= rhs);
    }
    {
        const Real lhs = lambda * log(lambda * lambda / (e_const * len_i));
        conds &= record("lambda_log", lhs, delta_eff, lhs >= delta_eff);
    }
    {
        const Real lhs = lambda * lambda, rhs = len_i / e_const;
        conds &= record("lambda_square", lhs, rhs, lhs >= rhs);
    }

    Certificate cert;
    cert.lemma = "spreading";
    cert.claimed = exp(-c * dn);
    cert.slack = Real(2);
    const auto norm_i = sup_norm(p, IntervalSet::single(iv.a, iv.b), cert.claimed * Real("1e-8"));
    cert.measured = norm_i.upper;
    cert.pass = cert.measured <= cert.slack * cert.claimed;
    cert.inputs = {{"p", p.to_json()},
                   {"E", e.to_json()},
                   {"I", {iv.a.str(), iv.b.str()}},
                   {"delta", delta.str()},
                   {"c", c.str()},
                   {"eps", eps.str()},
                   {"delta0", delta0.str()},
                   {"c0", c0.str()}};
    cert.details = {{"n", n},
                    {"n_eff", n_eff},
                    {"delta_eff", s30(delta_eff)},
                    {"reduced", delta > Real(1)},
                    {"lenE", s30(len_e)},
                    {"lenI", s30(len_i)},
                    {"A", s30(big_a)},
                    {"B", s30(big_b)},
                    {"lambda", s30(lambda)},
                    {"k", k},
                    {"eta", s30(eta)},
                    {"log_kappa", lk},
                    {"exponent", s30(a)},
                    {"hypothesis_tolerance", s30(tau)},
                    {"ratio", s30(cert.measured / cert.claimed)},
                    {"pass_slack4", cert.measured <= Real(4) * cert.claimed},
                    {"checks", checks},
                    {"side_conditions_hold", conds}};
    if (delta > Real(1)) cert.notes = "delta > 1 reduced to degree " + std::to_string(n_eff);
    return cert;
}

}  // namespace

Certificate spreading_check(const Poly& p, const IntervalSet& e, const Interval& iv, const Real& delta,
                            const Real& c, const Real& eps, const std::optional<Floors>& floors)
{
    return spreading_impl(p, e, iv, delta, c, eps, floors, true);
}

Certificate claim_check(const Poly& p_in, const Real& delta, const Real& c, const Real& eps,
                        const std::optional<Floors>& floors, int depth_limit, bool enforce_kappa)
{
    if (!(c > Real(0) && c < Real(1))) throw Error(ErrorKind::InvalidArgument, "c must lie in (0,1)");
    if (!(eps > Real(0) && eps < (Real(1) - c) / (Real(2) - c))) {
        throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, (1-c)/(2-c))");
    }
    if (!(delta > Real(0))) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
    const Poly p = normalized(p_in);
    PrecisionScope scope(p.work_bits());
    const int n = p.degree();
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "degree must be at least 1");

    const Real delta0 = floors ? floors->delta0 : min(delta, Real(1));
    const Real c0 = floors ? floors->c0 : c;
    const double lk = log_kappa(delta0.to_double(), eps.to_double(), c0.to_double());

    const IntervalSet e = e_set(p, delta);
    const IntervalSet ec = e_set(p, c * delta);
    const Real len_e = e.total_length();
    const Real len_ec = ec.total_length();
    const bool small = log_len(len_e) < Real(lk);
    if (!small && enforce_kappa) throw Error(ErrorKind::KappaFail, "|E_P(delta)| is not below kappa");

    const Real a = Real(1) / (Real(2) - c) + eps;
    const Real big_n = ceil(exp(Real(-lk)));
    nlohmann::json cover_json = {{"skipped", true}};
    if (small) {
        const DyadicCover cover = nadic_maximal_cover(e, big_n, a, depth_limit);

        int spread_pass = 0, spread_fail = 0, spread_err = 0;
        bool union_in_ec = true, union_in_relaxed = true;
        nlohmann::json members = nlohmann::json::array();
        for (std::size_t mi = 0; mi < cover.members.size(); ++mi) {
            const Interval& iv = cover.members[mi];
            nlohmann::json m = {{"I", {iv.a.str(), iv.b.str()}}, {"multiplicity", cover.multiplicity[mi].str(30)}};
            try {
                const Certificate s = spreading_impl(p, e.intersect(iv.a, iv.b), iv, delta, c, eps, Floors{delta0, c0}, false);
                m["spreading_pass"] = s.pass;
                m["ratio"] = s.details["ratio"];
                if (s.pass) ++spread_pass;
                else ++spread_fail;
                union_in_relaxed &= s.pass;
            } catch (const Error& err) {
                m["error"] = err.what();
                ++spread_err;
                union_in_relaxed = false;
            }
            const bool in_ec = ec.contains(IntervalSet::single(iv.a, iv.b));
            m["inside_E_cdelta"] = in_ec;
            union_in_ec &= in_ec;
            members.push_back(m);
        }
        const bool chain = cover.member_length >= pow(cover.covered_length, a) / big_n;
        cover_json = {{"N", big_n.str(30)},
                      {"members", members},
                      {"covered_length", s30(cover.covered_length)},
                      {"member_length", s30(cover.member_length)},
                      {"residual", s30(cover.residual)},
                      {"residual_bound", s30(cover.residual_bound)},
                      {"spreading_pass", spread_pass},
                      {"spreading_fail", spread_fail},
                      {"spreading_error", spread_err},
                      {"union_inside_E_cdelta", union_in_ec},
                      {"union_inside_slack2_set", union_in_relaxed},
                      {"chain", chain}};
    }

    Certificate cert;
    cert.lemma = "claim";
    cert.measured = -log(len_ec);
    cert.claimed = a * -log(len_e);
    cert.slack = Real(1);
    cert.pass = cert.measured <= cert.claimed;
    cert.inputs = {{"p", p_in.to_json()},      {"delta", delta.str()},   {"c", c.str()},
                   {"eps", eps.str()},         {"delta0", delta0.str()}, {"c0", c0.str()},
                   {"depth_limit", depth_limit},
                   {"enforce_kappa", enforce_kappa}};
    if (!small) cert.notes = "kappa gate not met; measured without it";
    cert.details = {{"lenE_delta", s30(len_e)},
                    {"kappa_gate", small},
                    {"lenE_cdelta", s30(len_ec)},
                    {"exponent", s30(a)},
                    {"log_kappa", lk},
                    {"cover", cover_json}};
    return cert;
}

MEps select_m_eps(const Real& t, const Real& gamma)
{
    if (!(t > Real(0) && t < Real(1))) throw Error(ErrorKind::InvalidArgument, "t must lie in (0,1)");
    if (!(gamma > Real(0) && gamma < Real(1) - t)) throw Error(ErrorKind::InvalidArgument, "gamma must lie in (0, 1-t)");
    const Real target = t + gamma;
    for (int m = 1; m <= 64; ++m) {
        const Real inv_m = Real(1) / Real(m);
        const Real c = pow(t, inv_m);
        const Real base = Real(1) / (Real(2) - c);
        const Real room = pow(target, inv_m) - base;
        if (!(room > Real(0))) continue;
        const Real eps = Real("0.99") * min(room, (Real(1) - c) / (Real(2) - c));
        return {m, c, eps};
    }
    throw Error(ErrorKind::NoMEps, "no M <= 64 satisfies the exponent inequality");
}

Certificate comparison_check(const Poly& p_in, const Real& delta, const Real& t, const Real& gamma,
                             const std::optional<Real>& delta0_in, bool enforce_kappa)
{
    if (!(delta > Real(0))) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
    const MEps me = select_m_eps(t, gamma);
    const Poly p = normalized(p_in);
    PrecisionScope scope(p.work_bits());
    if (p.degree() < 1) throw Error(ErrorKind::InvalidArgument, "degree must be at least 1");

    const Real base_delta0 = delta0_in ? *delta0_in : delta;
    if (base_delta0 > delta) throw Error(ErrorKind::InvalidArgument, "delta0 must not exceed delta");
    const Real claim_delta0 = min(Real(1), t * base_delta0);
    const double lk = log_kappa(claim_delta0.to_double(), me.eps.to_double(), me.c.to_double());
    const Real target = t + gamma;

    const IntervalSet e = e_set(p, delta);
    const IntervalSet et = e_set(p, t * delta);
    const Real len_e = e.total_length();
    const Real len_et = et.total_length();
    // Small enough that either every stage is below kappa or the inequality holds outright.
    const bool small = log_len(len_e) <= Real(lk) / target;
    if (!small && enforce_kappa) throw Error(ErrorKind::KappaFail, "|E_P(delta)| exceeds kappa^(1/(t+gamma))");

    nlohmann::json stages = nlohmann::json::array();
    Real worst = -Real::infinity();
    Real di = delta;
    for (int i = 0; i < me.m; ++i) {
        const Real len = i == 0 ? len_e : e_set(p, di).total_length();
        const Real margin = log_len(len) - Real(lk);
        worst = max(worst, margin);
        stages.push_back({{"stage", i}, {"delta", s30(di)}, {"len", s30(len)}, {"claim_applicable", margin < Real(0)}});
        di *= me.c;
    }

    Certificate cert;
    cert.lemma = "comparison";
    cert.measured = -log(len_et);
    cert.claimed = target * -log(len_e);
    cert.slack = Real(1);
    cert.pass = cert.measured <= cert.claimed;
    cert.inputs = {{"p", p_in.to_json()},
                   {"delta", delta.str()},
                   {"t", t.str()},
                   {"gamma", gamma.str()},
                   {"delta0", base_delta0.str()},
                   {"enforce_kappa", enforce_kappa}};
    if (!small) cert.notes = "kappa gate not met; measured without it";
    cert.details = {{"M", me.m},
                    {"kappa_gate", small},
                    {"c", s30(me.c)},
                    {"eps", s30(me.eps)},
                    {"exponent_check", s30(pow(Real(1) / (Real(2) - me.c) + me.eps, static_cast<long>(me.m)))},
                    {"log_kappa", lk},
                    {"lenE_delta", s30(len_e)},
                    {"lenE_tdelta", s30(len_et)},
                    {"stages", stages},
                    {"worst_stage_margin", s30(worst)},
                    {"all_stages_below_kappa", worst < Real(0)}};
    return cert;
}

Certificate reverify(const Certificate& cert)
{
    const auto& in = cert.inputs;
    if (cert.lemma == "spreading") {
        const auto iv = in.at("I");
        const Poly p = Poly::from_json(in.at("p"));
        PrecisionScope scope(p.work_bits());
        return spreading_check(p, IntervalSet::from_json(in.at("E")), Interval{read_real(iv.at(0)), read_real(iv.at(1))},
                               read_real(in.at("delta")), read_real(in.at("c")), read_real(in.at("eps")),
                               Floors{read_real(in.at("delta0")), read_real(in.at("c0"))});
    }
    if (cert.lemma == "claim") {
        const Poly p = Poly::from_json(in.at("p"));
        PrecisionScope scope(p.work_bits());
        return claim_check(p, read_real(in.at("delta")), read_real(in.at("c")), read_real(in.at("eps")),
                           Floors{read_real(in.at("delta0")), read_real(in.at("c0"))}, in.at("depth_limit").get<int>(),
                           in.value("enforce_kappa", true));
    }
    if (cert.lemma == "comparison") {
        const Poly p = Poly::from_json(in.at("p"));
        PrecisionScope scope(p.work_bits());
        return comparison_check(p, read_real(in.at("delta")), read_real(in.at("t")), read_real(in.at("gamma")),
                                read_real(in.at("delta0")), in.value("enforce_kappa", true));
    }
    if (cert.lemma == "theorem_a_step") {
        Certificate out = cert;
        const Real eps = read_real(in.at("eps"));
        out.measured = -log(read_real(in.at("m_prev_lower")));
        out.claimed = Real(2) * eps * -log(read_real(in.at("m_upper")));
        out.pass = out.measured <= out.slack * out.claimed;
        return out;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown lemma '" + cert.lemma + "'");
}

// ---- level-set decay scan ------------------------------------------------

TargetFunction lacunary_model(const std::vector<int>& degrees)
{
    if (degrees.empty()) throw Error(ErrorKind::InvalidArgument, "no degrees");
    const int top = *std::max_element(degrees.begin(), degrees.end());
    const long bits = std::max<long>(Poly::kDefaultBits, 2L * top + 128);
    PrecisionScope scope(guard_bits(bits, static_cast<std::size_t>(top) + 1));
    std::vector<Real> c(static_cast<std::size_t>(top) + 1);
    for (int n : degrees) c[static_cast<std::size_t>(n)] += exp(Real(-n));
    return TargetFunction::series(std::move(c), std::nullopt, bits);
}

bool ScanTable::ratios_increasing() const
{
    const ScanRow* prev = nullptr;
    int count = 0;
    for (const auto& r : rows) {
        if (!r.ratio_lo) continue;
        ++count;
        if (prev && !(*r.ratio_lo > *prev->ratio_hi)) return false;
        prev = &r;
    }
    return count >= 1;
}

namespace {

std::string opt_str(const std::optional<Real>& x) { return x ? x->str(20) : std::string(); }

Real midpoint(const Real& a, const Real& b) { return b.is_finite() ? ldexp(a + b, -1) : a; }

// Range of |log m| over m in [lo, hi].
std::pair<Real, Real> abs_log_bracket(const Real& lo, const Real& hi)
{
    if (hi < Real(1)) return {-log(hi), -log(lo)};
    if (lo > Real(1)) return {log(lo), log(hi)};
    return {Real(0), max(-log(lo), log(hi))};
}

}  // namespace

nlohmann::json ScanTable::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o = {{"j", r.j},
                            {"n_j", r.n},
                            {"E", r.e.str(20)},
                            {"E_star", r.e_star.str(20)},
                            {"m_lower", r.m_lower.str(20)},
                            {"m_upper", r.m_upper.str(20)},
                            {"beta_ok", r.beta_ok},
                            {"gap_ok", r.gap_ok},
                            {"sandwich_upper", r.sandwich_upper.str(20)},
                            {"note", r.note}};
        if (r.ratio_lo) o["ratio_1_3"] = {r.ratio_lo->str(20), r.ratio_hi->str(20)};
        if (r.scaled) o["scaled_1_4"] = r.scaled->str(20);
        if (r.sandwich_lower) o["sandwich_lower"] = r.sandwich_lower->str(20);
        arr.push_back(o);
    }
    nlohmann::json steps_json = nlohmann::json::array();
    for (const auto& s : steps) steps_json.push_back(s.to_json());
    return {{"rows", arr},
            {"tail_bound_mode", tail_bound_mode},
            {"precision_bits", precision_bits},
            {"ratios_increasing", ratios_increasing()},
            {"steps", steps_json}};
}

std::string ScanTable::to_csv() const
{
    std::ostringstream os;
    os << "j,n_j,E,E_star,m_lower,m_upper,ratio_1_3,scaled_1_4\n";
    for (const auto& r : rows) {
        os << r.j << ',' << r.n << ',' << r.e.str(20) << ',' << r.e_star.str(20) << ',' << r.m_lower.str(20) << ','
           << r.m_upper.str(20) << ',';
        if (r.ratio_lo) os << midpoint(*r.ratio_lo, *r.ratio_hi).str(20);
        os << ',' << opt_str(r.scaled) << '\n';
    }
    return os.str();
}

ScanTable theorem_a_scan(const TargetFunction& f, const std::vector<int>& degrees, const Real& beta,
                         const ScanOptions& opts)
{
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        if (degrees[i] < 0 || (i > 0 && degrees[i] <= degrees[i - 1])) {
            throw Error(ErrorKind::InvalidArgument, "degrees must be nonnegative and strictly increasing");
        }
    }
    if (!(beta > Real(0))) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    const int top = degrees.empty() ? 0 : degrees.back();
    ScanTable table;
    table.precision_bits = std::max<long>({Poly::kDefaultBits, 2L * top + 128, f.poly() ? f.poly()->work_bits() : 0});
    table.tail_bound_mode = opts.tail_bound_mode && f.kind() == TargetKind::chebyshev_series;
    PrecisionScope scope(table.precision_bits);

    std::optional<std::size_t> prev_idx;
    for (std::size_t idx = 0; idx < degrees.size(); ++idx) {
        ScanRow row;
        row.j = static_cast<int>(idx);
        row.n = degrees[idx];
        try {
            std::optional<Poly> best;
            if (table.tail_bound_mode) {
                row.e = f.tail_bound(row.n);
                const auto& c = f.poly()->cheb();
                const std::size_t keep = std::min(c.size(), static_cast<std::size_t>(row.n) + 1);
                best = Poly::from_chebyshev(std::vector<Real>(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(keep)),
                                            f.poly()->precision_bits());
            } else {
                const auto r = remez_exchange(f, row.n, opts.remez_tol);
                row.e = r.error;
                best = r.best_poly;
                if (!r.converged) row.note = "exchange stalled; ";
            }
            row.e_star = e_star(row.e, row.n);
            row.beta_ok = row.e <= exp(-beta * Real(row.n));

            const auto m = measure_sublevel(f, row.e_star, ldexp(Real(1), -(table.precision_bits - 8)), opts.rel_tol,
                                            std::size_t{1} << 24);
            row.m_lower = m.lower;
            row.m_upper = m.upper;
            if (m.budget_exceeded) row.note += "measure budget exceeded; ";

            if (!best->is_zero()) {
                const Real norm_p = sup_norm(*best, ldexp(Real(1), -64)).upper;
                row.sandwich_upper = poly_sublevel(*best, Real(4) * row.e_star * norm_p).set.total_length();
                if (idx > 0) {
                    const Real prev_star = table.rows.back().e_star;
                    row.sandwich_lower = poly_sublevel(*best, prev_star * norm_p / Real(4)).set.total_length();
                }
            } else {
                row.sandwich_upper = Real(2);
            }

            if (idx > 0) {
                const Real prev_star = table.rows.back().e_star;
                row.gap_ok = prev_star / Real(4) >= pow(Real(4) * row.e_star, opts.eps);
            }
            if (!row.beta_ok) row.note += "beta violated; excluded from ratios; ";
            const ScanRow* prev_ok = prev_idx ? &table.rows[*prev_idx] : nullptr;
            if (row.beta_ok && prev_ok && prev_ok->j == row.j - 1) {
                const auto [lo_abs, hi_abs] = abs_log_bracket(row.m_lower, row.m_upper);
                const auto [prev_lo, prev_hi] = abs_log_bracket(prev_ok->m_lower, prev_ok->m_upper);
                row.ratio_lo = lo_abs / prev_hi;
                row.ratio_hi = hi_abs / prev_lo;

                Certificate step;
                step.lemma = "theorem_a_step";
                step.inputs = {{"j", row.j},
                               {"eps", opts.eps.str()},
                               {"m_prev_lower", s30(prev_ok->m_lower)},
                               {"m_upper", s30(row.m_upper)}};
                step.measured = prev_hi;
                step.claimed = Real(2) * opts.eps * lo_abs;
                step.slack = Real(1);
                step.pass = step.measured <= step.claimed;
                step.details = {{"gap_ok", row.gap_ok}};
                table.steps.push_back(std::move(step));
            }
            if (row.j >= 1) {
                const Real mid = midpoint(row.m_lower, row.m_upper);
                if (mid > Real(0) && mid != Real(1)) row.scaled = log(abs(log(mid))) / Real(row.j);
            }
        } catch (const Error& err) {
            row.note += err.what();
        }
        table.rows.push_back(std::move(row));
        if (table.rows.back().beta_ok && table.rows.back().note.find("Error") == std::string::npos) {
            prev_idx = table.rows.size() - 1;
        }
    }
    return table;
}

}  // namespace lacuna
