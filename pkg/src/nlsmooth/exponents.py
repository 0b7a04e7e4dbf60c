"""Closed-form smoothing exponents for nonlinear semigroup estimates.

Everything in this module is exact arithmetic on the parameters of
regularization estimates of the form

    ||T_t u - T_t v||_r  <=  C t^{-alpha} e^{omega beta t} ||u - v||_q^{gamma}.

A Gagliardo-Nirenberg inequality for the generator yields a base triple
(alpha, beta, gamma) for one (q, r) pair; an iteration along the Lebesgue
scale extrapolates it to r = inf; interpolation with the contraction scale
brings the source norm down to any admissible s. The application helpers
(p-Laplace with various boundary couplings, doubly nonlinear diffusions)
package the standard inequality constants for each dimensional regime.

All functions are pure: same inputs give bit-identical outputs. Validity
conditions are reported by name, and violations raise ConditionError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

INF = float("inf")


class ConditionError(ValueError):
    """A validity condition of an exponent formula fails.

    condition holds the name of the first failed condition; conditions maps
    every condition that was evaluated to its boolean value.
    """

    def __init__(self, condition, message, conditions=None):
        super().__init__(message)
        self.condition = condition
        self.conditions = dict(conditions or {})


def _require(conditions, name, ok, message, strict=True):
    conditions[name] = bool(ok)
    if strict and not ok:
        raise ConditionError(name, message, conditions)
    return bool(ok)


@dataclass(frozen=True)
class GNParams:
    """Parameters of the generator inequality

    ||u||_r^{sigma} <= C ||u||_q^{rho} ( [u, Au]_q + omega ||u||_q^q ).
    """

    q: float
    r: float
    sigma: float
    rho: float = 0.0
    omega: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if not (1.0 <= self.q < INF):
            raise ValueError(f"q must satisfy 1 <= q < inf, got {self.q}")
        if not (1.0 <= self.r):
            raise ValueError(f"r must satisfy 1 <= r <= inf, got {self.r}")
        if not (0.0 < self.sigma < INF):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")
        if not (0.0 <= self.rho < INF):
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        if not (0.0 <= self.omega < INF):
            raise ValueError(f"omega must be nonnegative, got {self.omega}")
        if not (0.0 < self.c < INF):
            raise ValueError(f"c must be positive and finite, got {self.c}")


@dataclass(frozen=True)
class ExponentTriple:
    """One-step smoothing exponents from q to r, with the constant."""

    alpha: float
    beta: float
    gamma: float
    constant: float = 1.0


@dataclass(frozen=True)
class StarExponents:
    """Exponents of the extrapolated estimate landing in L^inf.

    The source norm of the extrapolated estimate is L^pivot, where
    pivot = gamma * r * m0 / q for iterated estimates and pivot = q when
    the inequality already reaches r = inf directly (then m0 is None).
    """

    alpha_star: float | None
    beta_star: float | None
    gamma_star: float | None
    m0: float | None
    pivot: float | None
    valid: bool
    conditions: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SExponents:
    """Exponents after lowering the source norm to L^s."""

    s: float
    alpha_s: float
    beta_s: float
    gamma_s: float
    theta_s: float
    constant_s: float | None = None
    case: str = ""
    star: StarExponents | None = None
    conditions: dict = field(default_factory=dict)


@dataclass(frozen=True)
class IterationParams:
    """Parameters of the Lebesgue-scale iteration m_{k+1} = kappa m_k - (r/kappa)(gamma - 1)."""

    kappa: float
    r: float
    gamma: float
    m0: float

    def __post_init__(self):
        if not (self.kappa > 1.0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must satisfy kappa > 1, got {self.kappa}")
        for name in ("r", "gamma", "m0"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")

    @property
    def seed_coefficient(self):
        # (kappa - 1) m0 + (r/kappa)(1 - gamma); positivity <=> strict growth
        k = self.kappa
        return (k - 1.0) * self.m0 + (self.r / k) * (1.0 - self.gamma)

    @property
    def increasing(self):
        return self.seed_coefficient > 0.0


@dataclass(frozen=True)
class IterationResult:
    params: IterationParams
    values: tuple
    closed_form: tuple
    increasing: bool
    growth_limit: float


def smoothing_exponents(params):
    """Base smoothing triple implied by a generator inequality.

    alpha = 1/sigma, gamma = (q + rho)/sigma, beta = gamma + 1, and the
    constant is (c/q)^{1/sigma}. The estimate it parametrizes is
    ||T_t u - T_t v||_r <= K t^{-alpha} e^{omega beta t} ||u - v||_q^{gamma}.
    """
    if not isinstance(params, GNParams):
        params = GNParams(*params)
    alpha = 1.0 / params.sigma
    gamma = (params.q + params.rho) / params.sigma
    beta = gamma + 1.0
    constant = (params.c / params.q) ** (1.0 / params.sigma)
    return ExponentTriple(alpha=alpha, beta=beta, gamma=gamma, constant=constant)


def extrapolate_to_infinity(q, r, gamma, alpha, beta, m0, strict=True):
    """Iterate a q -> r estimate along the Lebesgue scale up to L^inf.

    Requires a finite r with gamma*r > q (strict), a seed m0 >= q/gamma and
    a positive denominator D = (gamma*r/q - 1)*m0 + q*(1/gamma - 1). The
    result bounds the L^inf norm by the L^pivot norm, pivot = gamma*r*m0/q.
    With strict=False a violated condition yields valid=False instead of
    raising, with every condition reported by name.
    """
    for name, v in (("q", q), ("gamma", gamma), ("alpha", alpha), ("beta", beta), ("m0", m0)):
        if not (math.isfinite(v)):
            raise ValueError(f"{name} must be finite, got {v}")
    if q < 1.0 or gamma <= 0.0 or alpha <= 0.0:
        raise ValueError(f"need q >= 1, gamma > 0, alpha > 0; got q={q}, gamma={gamma}, alpha={alpha}")
    if r == INF:
        raise ValueError("r must be finite: an estimate into L^inf needs no extrapolation")
    if not (1.0 <= r and math.isfinite(r)):
        raise ValueError(f"r must satisfy 1 <= r < inf, got {r}")

    conditions = {}
    ok = _require(
        conditions,
        "gamma_r_gt_q",
        gamma * r > q,
        f"need gamma*r > q strictly, got gamma*r = {gamma * r} vs q = {q}",
        strict,
    )
    # multiplicative form with a roundoff slack: the boundary m0 = q/gamma is
    # admissible and is hit exactly (in real arithmetic) by the default seeds
    ok &= _require(
        conditions,
        "m0_ge_q_over_gamma",
        m0 * gamma >= q * (1.0 - 1e-12),
        f"need m0 >= q/gamma = {q / gamma}, got m0 = {m0}",
        strict,
    )
    kappa_ratio = gamma * r / q
    D = (kappa_ratio - 1.0) * m0 + q * (1.0 / gamma - 1.0)
    ok &= _require(
        conditions,
        "denominator_positive",
        D > 0.0,
        f"need (gamma*r/q - 1)*m0 + q*(1/gamma - 1) > 0, got {D}",
        strict,
    )
    if not ok:
        return StarExponents(None, None, None, m0, None, False, conditions)

    alpha_star = alpha * q / (gamma * D)
    gamma_star = (kappa_ratio - 1.0) * m0 / D
    beta_star = ((beta - 1.0) * kappa_ratio + gamma - beta) / D + 1.0
    # when beta = gamma + 1 an equivalent published form exists; evaluate both
    # and fail loudly on drift rather than silently trusting one transcription
    if abs(beta - (gamma + 1.0)) < 1e-12 * max(1.0, abs(beta)):
        beta_star_alt = (gamma * gamma * r / q - 1.0) / D + 1.0
        if abs(beta_star_alt - beta_star) > 1e-9 * max(1.0, abs(beta_star)):
            raise ArithmeticError(
                f"internal formula drift: beta* variants disagree "
                f"({beta_star} vs {beta_star_alt})"
            )
    pivot = kappa_ratio * m0
    return StarExponents(alpha_star, beta_star, gamma_star, m0, pivot, True, conditions)


def extrapolate_to_s(q, r, gamma, alpha, beta, s, c=1.0):
    """Lower the source norm of a q -> r estimate to L^s, 1 <= s < q.

    Interpolation against the L^s contraction gives, with
    theta_s = (r-q)s / (q(r-s)) for finite r and theta_s = s/q at r = inf,

        alpha_s = alpha / (1 - gamma(1 - theta_s)),
        beta_s  = (beta/2 + gamma theta_s) / (1 - gamma(1 - theta_s)),
        gamma_s = gamma theta_s / (1 - gamma(1 - theta_s)),

    valid when gamma(1 - theta_s) < 1. The constant amplifies to
    (c 2^{alpha_s})^{1/(1 - gamma(1 - theta_s))}.
    """
    if not (1.0 <= q < INF):
        raise ValueError(f"q must satisfy 1 <= q < inf, got {q}")
    if not (q < r):
        raise ValueError(f"r must exceed q, got r = {r} vs q = {q}")
    if gamma <= 0.0 or alpha <= 0.0:
        raise ValueError(f"need gamma > 0 and alpha > 0, got gamma={gamma}, alpha={alpha}")
    conditions = {}
    _require(
        conditions,
        "s_below_q",
        1.0 <= s < q,
        f"need 1 <= s < q = {q}, got s = {s}",
    )
    if r == INF:
        theta_s = s / q
    else:
        theta_s = (r - q) * s / (q * (r - s))
    den = 1.0 - gamma * (1.0 - theta_s)
    _require(
        conditions,
        "gamma_condition",
        den > 0.0,
        f"need gamma*(1 - theta_s) < 1, got gamma*(1-theta_s) = {gamma * (1.0 - theta_s)}",
    )
    alpha_s = alpha / den
    beta_s = (beta / 2.0 + gamma * theta_s) / den
    gamma_s = gamma * theta_s / den
    constant_s = (c * 2.0**alpha_s) ** (1.0 / den)
    return SExponents(
        s=float(s),
        alpha_s=alpha_s,
        beta_s=beta_s,
        gamma_s=gamma_s,
        theta_s=theta_s,
        constant_s=constant_s,
        case="source-interpolation",
        conditions=conditions,
    )


def _reduce_star_to_s(star, s, case, conditions=None, s_lower_name=None, s_lower_ok=True, s_lower_msg=""):
    """Shared source-lowering step from the pivot norm of a star estimate.

    theta_s = s/pivot; the reduction reuses the interpolation formulas with
    the star triple in place of (alpha, beta, gamma). s = pivot returns the
    star exponents unchanged.
    """
    conditions = dict(conditions or {})
    pivot = star.pivot
    _require(
        conditions,
        "s_in_range",
        1.0 <= s <= pivot,
        f"need 1 <= s <= {pivot}, got s = {s}",
    )
    if s_lower_name is not None:
        _require(conditions, s_lower_name, s_lower_ok, s_lower_msg)
    nu = s / pivot
    den = 1.0 - star.gamma_star * (1.0 - nu)
    _require(
        conditions,
        "gamma_star_condition",
        den > 0.0,
        f"need gamma_star*(1 - s/pivot) < 1, got {star.gamma_star * (1.0 - nu)}",
    )
    return SExponents(
        s=float(s),
        alpha_s=star.alpha_star / den,
        beta_s=(star.beta_star / 2.0 + star.gamma_star * nu) / den,
        gamma_s=star.gamma_star * nu / den,
        theta_s=nu,
        constant_s=None,
        case=case,
        star=star,
        conditions=conditions,
    )


def iteration_sequence(kappa, r, gamma, m0, n):
    """Orbit of m_{k+1} = kappa m_k - (r/kappa)(gamma - 1) with its closed form.

    Returns the first n+1 terms, the closed-form values

        m_k = kappa^k [ (kappa-1) m0 + (r/kappa)(1-gamma) ] / (kappa-1)
              - (r/kappa)(1-gamma)/(kappa-1),

    the strict-monotonicity flag (positivity of the bracketed seed
    coefficient) and the growth limit lim m_k / kappa^k.
    """
    params = IterationParams(kappa=kappa, r=r, gamma=gamma, m0=m0)
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    k, shift = params.kappa, (params.r / params.kappa) * (1.0 - params.gamma)
    values = [float(m0)]
    for _ in range(n):
        values.append(k * values[-1] - (params.r / k) * (params.gamma - 1.0))
    coeff = params.seed_coefficient / (k - 1.0)
    offset = shift / (k - 1.0)
    closed = [coeff * k**j - offset for j in range(n + 1)]
    return IterationResult(
        params=params,
        values=tuple(values),
        closed_form=tuple(closed),
        increasing=params.increasing,
        growth_limit=coeff,
    )


def moser_q_sequence(kappa, m, p, q0, n):
    """Orbit of q_{k+1} = kappa q_k + p - 1 - 1/m with its closed form."""
    if not (kappa > 1.0 and math.isfinite(kappa)):
        raise ValueError(f"kappa must satisfy kappa > 1, got {kappa}")
    if m <= 0.0:
        raise ValueError(f"m must be positive, got {m}")
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    c = p - 1.0 - 1.0 / m
    values = [float(q0)]
    for _ in range(n):
        values.append(kappa * values[-1] + c)
    coeff = q0 + c / (kappa - 1.0)
    closed = [coeff * kappa**j - c / (kappa - 1.0) for j in range(n + 1)]
    return IterationResult(
        params=IterationParams(kappa=kappa, r=0.0, gamma=1.0, m0=q0),
        values=tuple(values),
        closed_form=tuple(closed),
        increasing=coeff * (kappa - 1.0) > 0.0,
        growth_limit=coeff,
    )


def _moser_beta_series(kappa, m, p, q0, rel_tol=1e-12, max_terms=20000):
    """Numeric value of S = sum_{v>=0} 2^{-v} (kappa q_v / q_{v+1} + 1) kappa^{-v} q_{v+1}.

    Evaluated in the scaled variables z_v = kappa^{-v} q_v, which stay
    bounded, so no overflow for any kappa > 1. The term ratio tends to 1/2,
    hence the truncation error is comparable to the last term.
    """
    c = p - 1.0 - 1.0 / m
    z = float(q0)  # z_0
    total = 0.0
    scale = 1.0  # kappa^{-v}
    half = 1.0  # 2^{-v}
    for v in range(max_terms):
        z_next = z + c * scale / kappa  # z_{v+1} = z_v + c kappa^{-(v+1)}
        # kappa q_v / q_{v+1} = z_v / z_{v+1};  kappa^{-v} q_{v+1} = kappa z_{v+1}
        term = half * (z / z_next + 1.0) * kappa * z_next
        total += term
        if v >= 8 and term <= rel_tol * abs(total):
            return total
        z = z_next
        scale /= kappa
        half /= 2.0
    raise ArithmeticError("beta* series did not converge")


def moser_exponents(kappa, m, p, q0, s=1.0):
    """Star exponents of the Moser iteration for phi(u) = |u|^{m-1} u.

    Requires kappa > 1, kappa*m*q0 >= 1 and the seed condition
    D = (kappa - 1) q0 + p - 1 - 1/m > 0. Then

        alpha* = 1/(m D),   gamma* = (kappa - 1) q0 / D,
        beta*  = (kappa - 1)/(2 kappa D) * S,

    with S the iterated-constant series summed numerically. The source norm
    is lowered from the pivot kappa*m*q0 to L^s by the shared reduction.
    """
    if not (kappa > 1.0 and math.isfinite(kappa)):
        raise ValueError(f"kappa must satisfy kappa > 1, got {kappa}")
    if not (m > 0.0 and math.isfinite(m)):
        raise ValueError(f"m must be positive and finite, got {m}")
    if not (q0 > 0.0 and math.isfinite(q0)):
        raise ValueError(f"q0 must be positive and finite, got {q0}")
    if not math.isfinite(p):
        raise ValueError(f"p must be finite, got {p}")

    conditions = {}
    pivot = kappa * m * q0
    _require(
        conditions,
        "pivot_ge_one",
        pivot >= 1.0,
        f"need kappa*m*q0 >= 1, got {pivot}",
    )
    D = (kappa - 1.0) * q0 + p - 1.0 - 1.0 / m
    _require(
        conditions,
        "seed_condition",
        D > 0.0,
        f"need (kappa-1)*q0 + p - 1 - 1/m > 0, got {D}",
    )
    alpha_star = 1.0 / (m * D)
    gamma_star = (kappa - 1.0) * q0 / D
    S = _moser_beta_series(kappa, m, p, q0)
    beta_star = (kappa - 1.0) / D * S / (2.0 * kappa)
    star = StarExponents(alpha_star, beta_star, gamma_star, q0, pivot, True, conditions)
    return _reduce_star_to_s(star, s, case="moser", conditions=conditions)


# ---------------------------------------------------------------------------
# application helpers: p-Laplace family
# ---------------------------------------------------------------------------

_BCS = ("dirichlet", "neumann", "robin")


def _default_m0(p, threshold, given, what):
    """Seed defaulting: m0 = p is admissible iff p > threshold."""
    if given is not None:
        return float(given)
    if p > threshold:
        return float(p)
    raise ConditionError(
        "m0_required",
        f"default seed m0 = p needs p > {threshold}; "
        f"got p = {p}, so {what} requires an explicit m0",
    )


def _direct_star(alpha, gamma, pivot):
    """Star record for inequalities that reach r = inf without iteration."""
    return StarExponents(
        alpha_star=alpha,
        beta_star=gamma + 1.0,
        gamma_star=gamma,
        m0=None,
        pivot=pivot,
        valid=True,
        conditions={},
    )


def _no_theta(theta, case):
    if theta is not None:
        raise ValueError(f"theta only applies in the borderline case, not {case}")


def _no_m0(m0, case):
    if m0 is not None:
        raise ValueError(f"m0 is determined internally in {case}; pass m0=None")


def plaplace_exponents(d, p, s=1.0, m0=None, bc="dirichlet", theta=None):
    """L^s -> L^inf smoothing exponents for the p-Laplace evolution.

    Covers 1 < p < d, p = d and p > d on a d-dimensional domain. The
    boundary coupling (dirichlet, neumann, robin) does not change the
    exponents, only the constants, and is accepted for interface symmetry.
    For p = d the estimate carries a free interpolation parameter
    theta in (0, 1), default 1/2; m0 is then pinned internally. For p < d
    the seed defaults to m0 = p, admissible iff p > 2d/(d+2).
    """
    d = _check_dim(d)
    p = _check_p(p)
    if str(bc).lower() not in _BCS:
        raise ValueError(f"bc must be one of {_BCS}, got {bc!r}")
    _check_s(s)

    if p < d:
        _no_theta(theta, "p < d")
        m0 = _default_m0(p, 2.0 * d / (d + 2.0), m0, "plaplace_exponents with p < d")
        conditions = {}
        _require(conditions, "m0_ge_p", m0 >= p, f"need m0 >= p = {p}, got m0 = {m0}")
        gn = GNParams(q=2.0, r=p * d / (d - p), sigma=p, rho=0.0)
        base = smoothing_exponents(gn)
        star = extrapolate_to_infinity(gn.q, gn.r, base.gamma, base.alpha, base.beta, m0)
        conditions.update(star.conditions)
        return _reduce_star_to_s(star, s, case="plaplace:p<d", conditions=conditions)

    if p == d:
        _no_m0(m0, "the p = d case (it is pinned to 2/gamma_theta)")
        theta = 0.5 if theta is None else float(theta)
        if not (0.0 < theta < 1.0):
            raise ValueError(f"theta must lie in (0, 1), got {theta}")
        gn = GNParams(q=2.0, r=2.0 / (1.0 - theta), sigma=p / theta, rho=p * (1.0 - theta) / theta)
        base = smoothing_exponents(gn)
        m0_pinned = 2.0 / base.gamma
        star = extrapolate_to_infinity(gn.q, gn.r, base.gamma, base.alpha, base.beta, m0_pinned)
        return _reduce_star_to_s(star, s, case="plaplace:p=d", conditions=dict(star.conditions))

    # p > d: the inequality reaches L^inf directly with source L^2
    _no_theta(theta, "p > d")
    _no_m0(m0, "the p > d case")
    theta0 = p * d / (p * d + 2.0 * (p - d))
    gamma = (2.0 * theta0 + p * (1.0 - theta0)) / p
    star = _direct_star(alpha=theta0 / p, gamma=gamma, pivot=2.0)
    return _reduce_star_to_s(star, s, case="plaplace:p>d")


def dtn_exponents(d, p, s=1.0, m0=None, theta=None):
    """Smoothing exponents when the dynamics run on the boundary trace.

    The effective dimension is d - 1, which shifts every regime: for
    1 < p < d the seed defaults to m0 = p iff p > 2d/(d+1); for p = d the
    free parameter theta lies in (1 - 1/p, 1), default 1 - 1/(2p), with m0
    pinned to p; for p > d the estimate is direct from L^2.
    """
    d = _check_dim(d)
    if d < 2:
        raise ValueError(f"the boundary-trace case needs d >= 2, got d = {d}")
    p = _check_p(p)
    _check_s(s)

    if p < d:
        _no_theta(theta, "p < d")
        m0 = _default_m0(p, 2.0 * d / (d + 1.0), m0, "dtn_exponents with p < d")
        conditions = {}
        _require(conditions, "m0_ge_p", m0 >= p, f"need m0 >= p = {p}, got m0 = {m0}")
        gn = GNParams(q=2.0, r=p * (d - 1.0) / (d - p), sigma=p, rho=0.0)
        base = smoothing_exponents(gn)
        star = extrapolate_to_infinity(gn.q, gn.r, base.gamma, base.alpha, base.beta, m0)
        conditions.update(star.conditions)
        return _reduce_star_to_s(star, s, case="dtn:p<d", conditions=conditions)

    if p == d:
        _no_m0(m0, "the p = d trace case (it is pinned to p)")
        theta = 1.0 - 1.0 / (2.0 * p) if theta is None else float(theta)
        conditions = {}
        _require(
            conditions,
            "theta_in_range",
            1.0 - 1.0 / p < theta < 1.0,
            f"need theta in (1 - 1/p, 1) = ({1.0 - 1.0 / p}, 1), got {theta}",
        )
        gn = GNParams(q=2.0, r=1.0 / (1.0 - theta), sigma=p, rho=0.0)
        base = smoothing_exponents(gn)
        star = extrapolate_to_infinity(gn.q, gn.r, base.gamma, base.alpha, base.beta, float(p))
        conditions.update(star.conditions)
        return _reduce_star_to_s(star, s, case="dtn:p=d", conditions=conditions)

    _no_theta(theta, "p > d")
    _no_m0(m0, "the p > d trace case")
    star = _direct_star(alpha=1.0 / p, gamma=2.0 / p, pivot=2.0)
    return _reduce_star_to_s(star, s, case="dtn:p>d")


def fractional_exponents(d, p, sfrac, s=1.0, m0=None, theta=None):
    """Smoothing exponents for the fractional p-Laplace evolution of order sfrac.

    sfrac lies in (0, 1]; the regimes split on sfrac*p vs d. For
    sfrac*p < d the seed defaults to m0 = p iff p > 2d/(d + 2 sfrac) and
    the local exponents are recovered exactly at sfrac = 1. For
    sfrac*p = d, theta lies in (max(0, 1 - p/2), 1) with m0 pinned to p.
    For sfrac*p > d the estimate is direct from L^2.
    """
    d = _check_dim(d)
    p = _check_p(p)
    if not (0.0 < sfrac <= 1.0):
        raise ValueError(f"sfrac must lie in (0, 1], got {sfrac}")
    _check_s(s)
    sp = sfrac * p

    if sp < d:
        _no_theta(theta, "sfrac*p < d")
        m0 = _default_m0(p, 2.0 * d / (d + 2.0 * sfrac), m0, "fractional_exponents with sfrac*p < d")
        conditions = {}
        _require(conditions, "m0_ge_p", m0 >= p, f"need m0 >= p = {p}, got m0 = {m0}")
        gn = GNParams(q=2.0, r=p * d / (d - sp), sigma=p, rho=0.0)
        base = smoothing_exponents(gn)
        star = extrapolate_to_infinity(gn.q, gn.r, base.gamma, base.alpha, base.beta, m0)
        conditions.update(star.conditions)
        return _reduce_star_to_s(star, s, case="fractional:sp<d", conditions=conditions)

    if sp == d:
        _no_m0(m0, "the sfrac*p = d case (it is pinned to p)")
        lo = max(0.0, 1.0 - p / 2.0)
        theta = (lo + 1.0) / 2.0 if theta is None else float(theta)
        conditions = {}
        _require(
            conditions,
            "theta_in_range",
            lo < theta < 1.0,
            f"need theta in ({lo}, 1), got {theta}",
        )
        gn = GNParams(q=2.0, r=p / (1.0 - theta), sigma=p, rho=0.0)
        base = smoothing_exponents(gn)
        star = extrapolate_to_infinity(gn.q, gn.r, base.gamma, base.alpha, base.beta, float(p))
        conditions.update(star.conditions)
        return _reduce_star_to_s(star, s, case="fractional:sp=d", conditions=conditions)

    _no_theta(theta, "sfrac*p > d")
    _no_m0(m0, "the sfrac*p > d case")
    star = _direct_star(alpha=1.0 / p, gamma=2.0 / p, pivot=2.0)
    return _reduce_star_to_s(star, s, case="fractional:sp>d")


def doubly_nonlinear_exponents(d, p, m, s=1.0, q0=None, theta=None):
    """Smoothing exponents for u_t = div(|grad phi(u)|^{p-2} grad phi(u)),
    phi(u) = |u|^{m-1} u.

    For 1 < p < d the Moser route runs with kappa = d/(d-p) and a seed
    q0 >= p, defaulting to q0 = p iff p > d(1 + 1/m)/(1 + d + 1/m). For
    p = d, kappa = 1/(1-theta) with theta in (0, 1), default 1/2, and
    q0 defaults to p when admissible. For p > d the estimate is direct
    with pivot m + 1. m = 1 recovers the p-Laplace time exponents.
    """
    d = _check_dim(d)
    p = _check_p(p)
    if not (m > 0.0 and math.isfinite(m)):
        raise ValueError(f"m must be positive and finite, got {m}")
    _check_s(s)

    if p < d:
        _no_theta(theta, "p < d")
        threshold = d * (1.0 + 1.0 / m) / (1.0 + d + 1.0 / m)
        q0 = _default_m0(p, threshold, q0, "doubly_nonlinear_exponents with p < d")
        conditions = {}
        _require(conditions, "q0_ge_p", q0 >= p, f"need q0 >= p = {p}, got q0 = {q0}")
        out = moser_exponents(kappa=d / (d - p), m=m, p=p, q0=q0, s=s)
        conditions.update(out.conditions)
        return SExponents(
            s=out.s,
            alpha_s=out.alpha_s,
            beta_s=out.beta_s,
            gamma_s=out.gamma_s,
            theta_s=out.theta_s,
            case="doubly-nonlinear:p<d",
            star=out.star,
            conditions=conditions,
        )

    if p == d:
        theta = 0.5 if theta is None else float(theta)
        if not (0.0 < theta < 1.0):
            raise ValueError(f"theta must lie in (0, 1), got {theta}")
        conditions = {}
        if q0 is None:
            q0 = float(p)
        _require(conditions, "q0_ge_p", q0 >= p, f"need q0 >= p = {p}, got q0 = {q0}")
        out = moser_exponents(kappa=1.0 / (1.0 - theta), m=m, p=p, q0=q0, s=s)
        conditions.update(out.conditions)
        return SExponents(
            s=out.s,
            alpha_s=out.alpha_s,
            beta_s=out.beta_s,
            gamma_s=out.gamma_s,
            theta_s=out.theta_s,
            case="doubly-nonlinear:p=d",
            star=out.star,
            conditions=conditions,
        )

    # p > d: direct estimate with source L^{m+1}
    _no_theta(theta, "p > d")
    if q0 is not None:
        raise ValueError("q0 does not apply when p > d; pass q0=None")
    E = 1.0 + (m + 1.0) / m * (1.0 / d - 1.0 / p)
    alpha_star = 1.0 / (p * m * E)
    gamma_star = (m + 1.0) / (d * m * E)
    star = StarExponents(
        alpha_star=alpha_star,
        beta_star=gamma_star + 1.0,
        gamma_star=gamma_star,
        m0=None,
        pivot=m + 1.0,
        valid=True,
        conditions={},
    )
    return _reduce_star_to_s(star, s, case="doubly-nonlinear:p>d")


def barenblatt_exponent(d, p):
    """Sup-norm decay rate d/lambda of the source solution, lambda = d(p-2)+p.

    Defined for p > 2d/(d+1), where lambda > 0.
    """
    d = _check_dim(d)
    p = _check_p(p)
    lam = d * (p - 2.0) + p
    conditions = {}
    _require(
        conditions,
        "lambda_positive",
        lam > 0.0,
        f"need d(p-2)+p > 0, i.e. p > {2.0 * d / (d + 1.0)}, got p = {p}",
    )
    return d / lam


def _check_dim(d):
    if int(d) != d or int(d) < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    return int(d)


def _check_p(p):
    p = float(p)
    if not (p > 1.0 and math.isfinite(p)):
        raise ValueError(f"p must satisfy 1 < p < inf, got {p}")
    return p


def _check_s(s):
    if not (s >= 1.0 and math.isfinite(s)):
        raise ValueError(f"s must satisfy 1 <= s < inf, got {s}")
    return float(s)
