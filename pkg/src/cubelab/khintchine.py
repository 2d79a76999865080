"""Biased Khintchine constants q(p) = sup_lambda E|sum lambda_i xi_i|.

xi takes sqrt((1-p)/p) with probability p and -sqrt(p/(1-p)) otherwise, so it
is centered with unit variance. q(1/2) = 1 and q(p) < 1 for p in (1/2, 1); the
size of 1 - q(p) over the semigroup time t (p = (1 + e^-t)/2) controls how far
the dual constant sits below pi/2.

Two upper bounds are provided:

* ``certify_epsilon``: the moment / Paley-Zygmund argument with a concentrated
  branch at threshold theta. Rigorous but with epsilon around 1e-7.
* ``moment_envelope_q``: 1 - E|l| = E[(l^2 - 1)^2 / (2 (1 + |l|)^2)], bounded
  below by truncating at |l| <= R and controlling the tail with E l^6, E l^8.
  Every moment is bounded uniformly over lambda with the same sum of fourth
  powers s, and s is covered by a finite set of intervals.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from . import _io
from ._gray import chunked_gray, coordinate_sums, natural_sums, popcounts
from .dualnorm import SphereVector

ENUM_MAX = 24
EXACT_SMALL_MAX = 4
PZ_T = 0.5
PZ_DELTA = 1e-9


class CertificationError(ValueError):
    """The requested certificate cannot be produced at this p."""


@dataclass(frozen=True)
class BiasedDist:
    p: float

    def __post_init__(self):
        if not 0.5 <= self.p < 1.0:
            raise ValueError(f"p must lie in [1/2, 1), got {self.p!r}")

    @classmethod
    def from_time(cls, t: float) -> "BiasedDist":
        """Law of (y - rho)/sqrt(1 - rho^2) for a rho-biased sign, rho = e^-t."""
        if t <= 0:
            raise ValueError("t must be positive")
        return cls((1.0 + math.exp(-t)) / 2.0)

    @property
    def v_plus(self) -> float:
        return math.sqrt((1.0 - self.p) / self.p)

    @property
    def v_minus(self) -> float:
        return -math.sqrt(self.p / (1.0 - self.p))

    @property
    def prob_plus(self) -> float:
        return self.p

    def raw_moment(self, j: int) -> float:
        return self.p * self.v_plus**j + (1.0 - self.p) * self.v_minus**j

    def mean_abs(self) -> float:
        return 2.0 * math.sqrt(self.p * (1.0 - self.p))

    def cumulants(self, order: int = 8) -> list:
        """[kappa_0 (unused, 0), kappa_1, ..., kappa_order]."""
        m = [1.0] + [self.raw_moment(j) for j in range(1, order + 1)]
        k = [0.0] * (order + 1)
        for r in range(1, order + 1):
            k[r] = m[r] - sum(comb(r - 1, j - 1) * k[j] * m[r - j] for j in range(1, r))
        return k


def moments_from_cumulants(kappa, order: int) -> list:
    m = [1.0] + [0.0] * order
    for r in range(1, order + 1):
        m[r] = sum(comb(r - 1, j - 1) * kappa[j] * m[r - j] for j in range(1, r + 1))
    return m


def _coords(lam) -> np.ndarray:
    return np.asarray(getattr(lam, "coords", lam), dtype=float)


def exact_mean_abs(p: float, lam) -> float:
    """E|sum lambda_i xi_i| by enumerating all 2^n outcomes (Gray order)."""
    lam = _coords(lam)
    n = lam.size
    if n > ENUM_MAX:
        raise ValueError(f"exact enumeration limited to n <= {ENUM_MAX}")
    d = BiasedDist(p)
    base = float(lam.sum()) * d.v_plus
    logw_plus, logw_minus = math.log(d.p), math.log1p(-d.p)
    total = 0.0
    for k, s in chunked_gray(lam * (d.v_minus - d.v_plus)):
        # k counts minus outcomes
        w = np.exp((n - k) * logw_plus + k * logw_minus)
        total += float(np.dot(w, np.abs(base + s)))
    if total > float(np.linalg.norm(lam)) + 1e-12:
        raise AssertionError(f"E|l| = {total!r} exceeds ||lambda||_2")
    return total


def _outcomes(d: BiasedDist, n: int):
    """Natural-order outcome weights and the per-coordinate value matrix (2^n x n)."""
    k = popcounts(n)
    w = d.p ** (n - k) * (1.0 - d.p) ** k
    z = np.arange(1 << n)[:, None]
    bits = (z >> np.arange(n)) & 1
    xi = np.where(bits == 1, d.v_minus, d.v_plus)
    return w, xi


def _sign_moment(d: BiasedDist, lam: np.ndarray):
    """(E|l|, E[sign(l) xi]) for l = <lambda, xi>, sign(0) := +1."""
    n = lam.size
    base = float(lam.sum()) * d.v_plus
    ell = natural_sums(lam * (d.v_minus - d.v_plus), base=base)
    k = popcounts(n)
    w = np.exp((n - k) * math.log(d.p) + k * math.log1p(-d.p))
    sw = np.where(ell >= 0.0, w, -w)
    parts = coordinate_sums(sw, n)
    grad = d.v_plus * parts[:, 0] + d.v_minus * parts[:, 1]
    return float(np.dot(w, np.abs(ell))), grad


@dataclass(frozen=True)
class QConfig:
    restarts: int = 20
    seed: int = 42
    max_iter: int = 1000
    tol: float = 1e-14


def _sphere_ascent(d: BiasedDist, lam: np.ndarray, cfg: QConfig):
    value, grad = _sign_moment(d, lam)
    for _ in range(cfg.max_iter):
        norm = float(np.linalg.norm(grad))
        if norm == 0.0:
            break
        new = grad / norm
        new_value, new_grad = _sign_moment(d, new)
        if new_value < value - 1e-12:
            raise AssertionError("sphere ascent decreased E|l|")
        if new_value - value < cfg.tol:
            if new_value > value:
                lam, value = new, new_value
            break
        lam, value, grad = new, new_value, new_grad
    return lam, value


def q_lower(p: float, n: int, config: QConfig = QConfig()):
    """Best-found sup_lambda E|sum lambda_i xi_i| at dimension n (a lower bound for q(p))."""
    if not 1 <= n <= ENUM_MAX:
        raise ValueError(f"n must be in [1, {ENUM_MAX}]")
    d = BiasedDist(p)
    starts = [np.eye(n)[0], np.full(n, 1.0 / math.sqrt(n))]
    for r in range(config.restarts):
        g = np.random.default_rng(config.seed + r).standard_normal(n)
        starts.append(g / np.linalg.norm(g))
    best_lam, best = None, -math.inf
    for s in starts:
        lam, val = _sphere_ascent(d, s, config)
        if val > best:
            best_lam, best = lam, val
    return SphereVector.normalized(best_lam), best


def q_exact_small(p: float, n: int) -> float:
    """Exact sup over unit lambda of E|l| at dimension n <= 4.

    At a maximizer lambda is proportional to E[s xi] with s = sign(l), so the
    maximum is attained among the 2^(2^n) sign assignments s.
    """
    if not 1 <= n <= EXACT_SMALL_MAX:
        raise ValueError(f"exact enumeration only for 1 <= n <= {EXACT_SMALL_MAX}")
    d = BiasedDist(p)
    w, xi = _outcomes(d, n)
    size = 1 << n
    codes = np.arange(1 << (size - 1), dtype=np.int64)
    S = np.ones((codes.size, size))
    S[:, 1:] = 1.0 - 2.0 * ((codes[:, None] >> np.arange(size - 1)) & 1)
    G = S @ (w[:, None] * xi)
    norms = np.linalg.norm(G, axis=1)
    ok = norms > 0
    lam = G[ok] / norms[ok, None]
    vals = np.abs(lam @ xi.T) @ w
    return float(vals.max())


@dataclass(frozen=True)
class MomentReport:
    lam: SphereVector
    p: float
    moments: tuple  # E l^2, E l^4, E l^6, E l^8
    var_ell2: float
    ratio_B: float

    @property
    def ex2(self) -> float:
        return self.var_ell2

    @property
    def ex4(self) -> float:
        m2, m4, m6, m8 = self.moments
        return m8 - 4 * m6 + 6 * m4 - 4 * m2 + 1


def cumulant_moments(p: float, lam, max_order: int = 8) -> MomentReport:
    """Even moments of l = <lambda, xi> via kappa_j(l) = kappa_j(xi) sum lambda_i^j."""
    if max_order < 8:
        raise ValueError("max_order must be at least 8")
    lam_v = _coords(lam)
    d = BiasedDist(p)
    kx = d.cumulants(max_order)
    kl = [0.0] + [kx[j] * float(np.sum(lam_v**j)) for j in range(1, max_order + 1)]
    m = moments_from_cumulants(kl, max_order)
    moments = (m[2], m[4], m[6], m[8])
    var = m[4] - m[2] ** 2
    ex4 = m[8] - 4 * m[6] + 6 * m[4] - 4 * m[2] + 1
    ratio = ex4 / var**2 if var > 1e-15 else math.nan
    sv = lam if isinstance(lam, SphereVector) else SphereVector.normalized(lam_v)
    return MomentReport(sv, p, moments, var, ratio)


@dataclass(frozen=True)
class CertifiedBound:
    p: float
    theta: float
    epsilon: float
    B_bound: float
    branch1: float
    branch2: float
    q_upper: float
    audit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return _io.json_text(self.to_dict())


def certify_epsilon(p: float, theta: float = 0.99) -> CertifiedBound:
    """q(p) <= max(1 - eps^2, 2 sqrt(p(1-p)) + sqrt(1-theta)).

    Spread branch (max lambda_i^2 <= theta): Var[l^2] >= 2(1 - theta), E l^8 is
    bounded by the moments of a variable whose cumulants are |kappa_j(xi)|, and
    Paley-Zygmund at t = 1/2 forbids E|l| >= 1 - eps for eps below both
    thresholds. Concentrated branch: E|l| <= E|xi| + sqrt(1 - theta).
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    if p >= 1.0:
        raise CertificationError("moments diverge as p -> 1")
    if p <= 0.5:
        raise CertificationError("p must exceed 1/2")
    d = BiasedDist(p)
    branch2 = d.mean_abs() + math.sqrt(1.0 - theta)
    if branch2 >= 1.0:
        raise CertificationError(
            f"concentrated branch fails: 2 sqrt(p(1-p)) + sqrt(1-theta) = {branch2:.6f} >= 1"
        )
    kx = d.cumulants(8)
    kabs = [0.0, 0.0] + [abs(x) for x in kx[2:]]
    U = moments_from_cumulants(kabs, 8)
    # X = |l^2 - 1|; (a-1)^4 <= a^4 + 1 for a >= 0, and E l^6 >= 1 by Jensen
    ux4 = min(U[8] + 1.0, U[8] - 4.0 + 6.0 * U[4] - 3.0)
    var_floor = 2.0 * (1.0 - theta)
    B = ux4 / var_floor**2
    gap = min(0.5 * math.sqrt(var_floor), 0.07)
    # u = sqrt(eps + 2 eps^2) with u (2 + u) = gap
    u = -1.0 + math.sqrt(1.0 + gap)
    eps1 = (-1.0 + math.sqrt(1.0 + 8.0 * u * u)) / 4.0
    eps2 = (9.0 / (16.0 * B) - PZ_DELTA) / 2.0
    eps = min(eps1, eps2)
    if eps <= 0.0:
        raise CertificationError(f"no admissible epsilon (B = {B:.6g})")
    branch1 = 1.0 - eps * eps
    root = math.sqrt(eps + 2 * eps * eps)
    audit = {
        "cumulants_xi": kx[1:],
        "E_xi4": d.raw_moment(4),
        "U_ell4": U[4],
        "U_ell8": U[8],
        "U_X4": ux4,
        "var_floor": var_floor,
        "gap": gap,
        "eps_gap": eps1,
        "eps_pz": eps2,
        "pz_lower": 9.0 / (16.0 * B),
        "cheps_lhs": root * (1.0 + root),
    }
    return CertifiedBound(p, theta, eps, B, branch1, branch2, max(branch1, branch2), audit)


R_GRID = np.linspace(1.0, 12.0, 2000)


def moment_envelope_q(p: float, s_intervals: int = 256) -> float:
    """Upper bound on sup over unit lambda (any n) of E|<lambda, xi>|, or 1 if vacuous.

    With s = sum lambda_i^4 in (0, 1]: E l^4 - 1 = 2 + kappa_4 s and, using
    sum|lambda|^6 <= s^1.5, sum lambda^8 <= s^2, (sum|lambda|^3)^2 <= s,
    sum|lambda|^5 <= s^1.25, explicit bounds on E l^6 and E l^8 follow.
    Then for every R >= 1,
        1 - E|l| >= (E l^4 - 1 - min(E l^8 / R^4, E l^6 / R^2)) / (2 (1 + R)^2).
    """
    if not 0.5 <= p < 1.0:
        raise ValueError(f"p must lie in [1/2, 1), got {p!r}")
    k = BiasedDist(p).cumulants(8)
    edges = np.linspace(0.0, 1.0, s_intervals + 1)
    lo, hi = edges[:-1], edges[1:]
    v = np.minimum(2.0 + k[4] * lo, 2.0 + k[4] * hi)
    s4 = hi if k[4] > 0 else lo
    m8 = (
        abs(k[8]) * hi**2
        + 28 * abs(k[6]) * hi**1.5
        + 56 * abs(k[5] * k[3]) * hi**1.75
        + 35 * k[4] ** 2 * hi**2
        + 210 * k[4] * s4
        + 280 * k[3] ** 2 * hi
        + 105
    )
    m6 = abs(k[6]) * hi**1.5 + 15 * k[4] * s4 + 10 * k[3] ** 2 * hi + 15
    R = R_GRID
    tail = np.minimum(m8[:, None] / R**4, m6[:, None] / R**2)
    gain = ((v[:, None] - tail) / (2.0 * (1.0 + R) ** 2)).max(axis=1)
    return float(min(1.0, 1.0 - gain.min()))


def q_upper_bound(p: float, method: str = "combined", theta: float = 0.99) -> float:
    """Best available rigorous upper bound on q(p); 1 where nothing certifies."""
    if method not in ("combined", "pz", "envelope"):
        raise ValueError(f"unknown method {method!r}")
    q = 1.0
    if method in ("combined", "pz"):
        try:
            q = min(q, certify_epsilon(p, theta).q_upper)
        except CertificationError:
            pass
    if method in ("combined", "envelope") and p < 1.0:
        q = min(q, moment_envelope_q(p))
    return q


def improved_cdual_bound(grid_size: int = 400, certify: bool = True, method: str = "combined") -> float:
    """int_0^1 min(1, q((1 + rho)/2)) / sqrt(1 - rho^2) d rho, with rho = sin(theta).

    Trapezoid rule in theta on ``grid_size`` points. With ``certify=False`` every
    q is replaced by 1 and the integral is pi/2.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    theta = np.linspace(0.0, math.pi / 2, grid_size)
    q = np.ones_like(theta)
    if certify:
        for j, th in enumerate(theta):
            rho = math.sin(th)
            p = (1.0 + rho) / 2.0
            if 0.5 < p < 1.0:
                q[j] = min(1.0, q_upper_bound(p, method))
    return float(np.trapezoid(q, theta))


def arcsine_quadrature(grid_size: int = 400) -> float:
    """int_0^1 d rho / sqrt(1 - rho^2) through the same substitution; equals pi/2."""
    theta = np.linspace(0.0, math.pi / 2, grid_size)
    return float(np.trapezoid(np.ones_like(theta), theta))


def profile_rows(ps, n: int, config: QConfig = QConfig()):
    """Rows (p, q_lower, n_used, q_upper, epsilon, branch2); certification failures give nan."""
    rows = []
    for p in ps:
        _, ql = q_lower(p, n, config)
        try:
            cb = certify_epsilon(p)
            eps, b2 = cb.epsilon, cb.branch2
        except CertificationError:
            eps, b2 = math.nan, math.nan
        rows.append((p, ql, n, q_upper_bound(p), eps, b2))
    return rows
