#pragma once

#include "lacuna/poly.hpp"
#include "lacuna/real.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lacuna {

enum class TargetKind { chebyshev_series, polynomial, builtin };

/// omega(h) = constant * h^exponent. Lipschitz is the exponent-1 case.
struct Modulus {
    enum class Type { lipschitz, holder };
    Type type = Type::lipschitz;
    Real constant{1};
    Real exponent{1};

    Real operator()(const Real& h) const;
};

/// A continuous function on [-1,1] with a stated modulus of continuity.
///
/// Series and polynomial targets are stored as a Poly; builtins are
/// evaluated directly at the working precision.
class TargetFunction {
public:
    static TargetFunction series(std::vector<Real> cheb, std::optional<Modulus> modulus = {},
                                 long bits = Poly::kDefaultBits);
    static TargetFunction polynomial(std::vector<Real> mono, std::optional<Modulus> modulus = {},
                                     long bits = Poly::kDefaultBits);
    static TargetFunction from_poly(const Poly& p, std::optional<Modulus> modulus = {});
    /// abs, exp, runge (1/(1+25x^2)), sign_smooth (tanh(10x)).
    static TargetFunction builtin(const std::string& name, std::optional<Modulus> modulus = {});

    TargetKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const Modulus& modulus() const { return modulus_; }
    /// Present for series and polynomial targets.
    const std::optional<Poly>& poly() const { return poly_; }

    Real operator()(const Real& x) const;

    /// sum_{k>n} |a_k| for series targets: a bound on E_n(f).
    Real tail_bound(int n) const;

    nlohmann::json to_json() const;
    static TargetFunction from_json(const nlohmann::json& j);

private:
    TargetKind kind_ = TargetKind::builtin;
    std::string name_;
    Modulus modulus_;
    std::optional<Poly> poly_;
};

}  // namespace lacuna
