#include "lacuna/target.hpp"

#include "lacuna/errors.hpp"

namespace lacuna {

Real Modulus::operator()(const Real& h) const
{
    if (type == Type::lipschitz || exponent == Real(1)) return constant * h;
    return constant * pow(h, exponent);
}

namespace {

Modulus lipschitz(const Real& c) { return {Modulus::Type::lipschitz, c, Real(1)}; }

// ||p'|| <= sum k^2 |c_k| since |T_k'| <= k^2 on [-1,1].
Modulus poly_modulus(const Poly& p)
{
    PrecisionScope scope(p.work_bits());
    Real s(0);
    const auto& c = p.cheb();
    for (std::size_t k = 1; k < c.size(); ++k) s += abs(c[k]) * Real(static_cast<long>(k * k));
    return lipschitz(s);
}

}  // namespace

TargetFunction TargetFunction::from_poly(const Poly& p, std::optional<Modulus> modulus)
{
    TargetFunction f;
    f.kind_ = TargetKind::chebyshev_series;
    f.poly_ = p;
    f.modulus_ = modulus ? *modulus : poly_modulus(p);
    return f;
}

TargetFunction TargetFunction::series(std::vector<Real> cheb, std::optional<Modulus> modulus, long bits)
{
    return from_poly(Poly::from_chebyshev(std::move(cheb), bits), std::move(modulus));
}

TargetFunction TargetFunction::polynomial(std::vector<Real> mono, std::optional<Modulus> modulus, long bits)
{
    TargetFunction f = from_poly(Poly::from_monomial(std::move(mono), bits), std::move(modulus));
    f.kind_ = TargetKind::polynomial;
    return f;
}

TargetFunction TargetFunction::builtin(const std::string& name, std::optional<Modulus> modulus)
{
    TargetFunction f;
    f.kind_ = TargetKind::builtin;
    f.name_ = name;
    if (name == "abs") f.modulus_ = lipschitz(Real(1));
    else if (name == "exp") f.modulus_ = lipschitz(Real::euler());
    else if (name == "runge") f.modulus_ = lipschitz(Real("3.25"));  // max |f'| = 15 sqrt(3) / 8
    else if (name == "sign_smooth") f.modulus_ = lipschitz(Real(10));
    else throw Error(ErrorKind::InvalidArgument, "unknown builtin '" + name + "'");
    if (modulus) f.modulus_ = *modulus;
    return f;
}

Real TargetFunction::operator()(const Real& x) const
{
    if (poly_) return (*poly_)(x);
    if (name_ == "abs") return abs(x);
    if (name_ == "exp") return exp(x);
    if (name_ == "runge") return Real(1) / (Real(1) + Real(25) * x * x);
    return tanh(Real(10) * x);
}

Real TargetFunction::tail_bound(int n) const
{
    if (!poly_) throw Error(ErrorKind::InvalidArgument, "tail bound needs a series target");
    PrecisionScope scope(poly_->work_bits());
    Real s(0);
    const auto& c = poly_->cheb();
    for (std::size_t k = static_cast<std::size_t>(std::max(n + 1, 0)); k < c.size(); ++k) s += abs(c[k]);
    return s;
}

nlohmann::json TargetFunction::to_json() const
{
    nlohmann::json j;
    switch (kind_) {
    case TargetKind::chebyshev_series:
        j["kind"] = "chebyshev_series";
        break;
    case TargetKind::polynomial:
        j["kind"] = "polynomial";
        break;
    case TargetKind::builtin:
        j["kind"] = "builtin";
        j["name"] = name_;
        break;
    }
    if (poly_) {
        const auto& c = poly_->coefficients(kind_ == TargetKind::polynomial ? Basis::monomial : Basis::chebyshev);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : c) arr.push_back(v.str());
        j["coefficients"] = arr;
        j["precision_bits"] = poly_->precision_bits();
    }
    j["modulus"] = {{"type", modulus_.type == Modulus::Type::lipschitz ? "lipschitz" : "holder"},
                    {"constant", modulus_.constant.str()},
                    {"exponent", modulus_.exponent.str()}};
    return j;
}

TargetFunction TargetFunction::from_json(const nlohmann::json& j)
{
    auto read = [](const nlohmann::json& v) {
        return v.is_string() ? Real(v.get<std::string>()) : Real(v.get<double>());
    };
    std::optional<Modulus> modulus;
    if (j.contains("modulus")) {
        const auto& m = j.at("modulus");
        Modulus mod;
        const std::string type = m.value("type", "lipschitz");
        if (type == "holder") mod.type = Modulus::Type::holder;
        else if (type != "lipschitz") throw Error(ErrorKind::InvalidArgument, "unknown modulus type '" + type + "'");
        if (m.contains("constant")) mod.constant = read(m.at("constant"));
        if (m.contains("exponent")) mod.exponent = read(m.at("exponent"));
        if (!(mod.constant >= Real(0)) || !(mod.exponent > Real(0)) || mod.exponent > Real(1)) {
            throw Error(ErrorKind::InvalidArgument, "modulus needs constant >= 0 and exponent in (0,1]");
        }
        modulus = mod;
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "builtin") return builtin(j.at("name").get<std::string>(), modulus);
    const long bits = j.value("precision_bits", Poly::kDefaultBits);
    const auto& arr = j.at("coefficients");
    PrecisionScope scope(guard_bits(bits, arr.size()));
    std::vector<Real> c;
    for (const auto& v : arr) c.push_back(read(v));
    if (kind == "chebyshev_series") return series(std::move(c), modulus, bits);
    if (kind == "polynomial") return polynomial(std::move(c), modulus, bits);
    throw Error(ErrorKind::InvalidArgument, "unknown target kind '" + kind + "'");
}

}  // namespace lacuna
