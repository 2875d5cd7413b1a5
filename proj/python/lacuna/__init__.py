"""Python front end to the lacuna core.

Reals are passed and returned as decimal strings so no precision is lost;
polynomials are dicts ``{"basis": "chebyshev"|"monomial", "coefficients": [...]}``.
"""

import json
from typing import Optional, Sequence, Union

from . import _core
from ._core import LacunaError

__all__ = [
    "LacunaError",
    "chebyshev",
    "monomial",
    "best_approx",
    "sublevel",
    "e_set",
    "measure",
    "log_kappa",
    "select_m_eps",
    "spreading_check",
    "claim_check",
    "comparison_check",
    "reverify",
    "theorem_a_scan",
    "phi_series",
    "u_poly",
    "r_poly",
    "build_theorem_b",
    "calibrate_c1",
    "sweep",
    "beurling_partial_sum",
]

Number = Union[int, float, str]
DEFAULT_BITS = 256


def _s(x: Number) -> str:
    return x if isinstance(x, str) else repr(x)


def _poly(p) -> str:
    return json.dumps(p)


def _target(f) -> str:
    # builtin names pass through as JSON strings
    return json.dumps(f)


def chebyshev(coeffs: Sequence[Number], precision_bits: int = DEFAULT_BITS) -> dict:
    return {"basis": "chebyshev", "coefficients": [_s(c) for c in coeffs], "precision_bits": precision_bits}


def monomial(coeffs: Sequence[Number], precision_bits: int = DEFAULT_BITS) -> dict:
    return {"basis": "monomial", "coefficients": [_s(c) for c in coeffs], "precision_bits": precision_bits}


def best_approx(target, degrees: Sequence[int], tol: Number = "1e-30", precision: int = DEFAULT_BITS) -> list:
    """E_n(f) for each degree. ``target`` is a builtin name or a target dict."""
    return json.loads(_core.approx(_target(target), list(degrees), _s(tol), precision))


def sublevel(p: dict, threshold: Number, precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.sublevel(_poly(p), _s(threshold), precision))


def e_set(p: dict, delta: Number, precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.e_set(_poly(p), _s(delta), precision))


def measure(target, t: Number, tol: Number = "1e-12", precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.measure(_target(target), _s(t), _s(tol), precision))


def log_kappa(delta0: float, eps: float, c0: float) -> float:
    return _core.log_kappa(delta0, eps, c0)


def select_m_eps(t: Number, gamma: Number) -> dict:
    return json.loads(_core.select_m_eps(_s(t), _s(gamma)))


def spreading_check(p: dict, E, I, delta: Number, c: Number, eps: Number, precision: int = DEFAULT_BITS) -> dict:
    """E is a list of [a, b] pairs, I a single [a, b] pair."""
    e = json.dumps([[_s(a), _s(b)] for a, b in E])
    return json.loads(_core.spreading(_poly(p), e, _s(I[0]), _s(I[1]), _s(delta), _s(c), _s(eps), precision))


def claim_check(p: dict, delta: Number, c: Number, eps: Number, depth_limit: int = 40,
                enforce_kappa: bool = True, precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.claim(_poly(p), _s(delta), _s(c), _s(eps), depth_limit, enforce_kappa, precision))


def comparison_check(p: dict, delta: Number, t: Number, gamma: Number, enforce_kappa: bool = True,
                     precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.comparison(_poly(p), _s(delta), _s(t), _s(gamma), enforce_kappa, precision))


def reverify(certificate: dict, precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.reverify(json.dumps(certificate), precision))


def theorem_a_scan(degrees: Sequence[int], beta: Number = "0.5", target=None, eps: Number = "0.25",
                   tail_bound_mode: bool = True, precision: int = DEFAULT_BITS) -> dict:
    """Without a target, scans the lacunary model sum_j e^(-n_j) T_(n_j)."""
    t: Optional[str] = None if target is None else _target(target)
    return json.loads(_core.scan(t, list(degrees), _s(beta), _s(eps), tail_bound_mode, precision))


def phi_series(n: int, l: int) -> dict:
    return json.loads(_core.phi_series(n, l))


def u_poly(n: int) -> dict:
    return json.loads(_core.u_poly(n))


def r_poly(n: int, l: int) -> dict:
    return json.loads(_core.r_poly(n, l))


def build_theorem_b(phi: str = "inv_log", psi: str = "exp_neg2", stages: int = 3, c1: float = 8.0,
                    degree_cap: int = 20000, precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.theorem_b(phi, psi, stages, c1, degree_cap, precision))


def calibrate_c1(c1: float = 8.0, n_max: int = 21, l_max: int = 30) -> dict:
    return json.loads(_core.calibrate(c1, n_max, l_max))


def sweep(lemma: str, count: int = 500, seed: int = 0, max_degree: int = 0, threads: int = 0,
          enforce_kappa: bool = True, precision: int = DEFAULT_BITS) -> dict:
    return json.loads(_core.sweep(lemma, count, seed, max_degree, threads, enforce_kappa, precision))


def beurling_partial_sum(errors: Sequence[Number], n_terms: int, precision: int = DEFAULT_BITS) -> str:
    return _core.beurling([_s(e) for e in errors], n_terms, precision)
