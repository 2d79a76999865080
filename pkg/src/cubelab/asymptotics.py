"""Exact combinatorial sequences and their limits: majority, Bernoulli CLT, kernel series, slice Gram matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy import integrate

from .kernel import dense_matrix, kernel_table, objective, phi_log, phi_values

LOG_SPACE_ABOVE = 60
SLICE_MAX = 14


@dataclass(frozen=True)
class SeriesPoint:
    n: int
    value: float
    reference: float

    @property
    def gap(self) -> float:
        return self.value - self.reference


def log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binom_half(n: int, k: int, log_space: bool | None = None) -> float:
    """C(n, k) / 2^n; exact integer division up to LOG_SPACE_ABOVE, lgamma beyond."""
    if log_space is None:
        log_space = n > LOG_SPACE_ABOVE
    if log_space:
        return math.exp(log_comb(n, k) - n * math.log(2.0))
    return math.comb(n, k) / (1 << n)


def majority_odd(n: int, log_space: bool | None = None):
    """(||grad f_n||_1, E|f_n| / ||grad f_n||_1) for f_n = sign(x_1 + ... + x_n)."""
    if n < 1 or n % 2 == 0:
        raise ValueError("majority_odd needs odd n")
    grad = 2.0 * binom_half(n, (n + 1) // 2, log_space) * math.sqrt((n + 1) / 2)
    return grad, 1.0 / grad


def majority_even(n: int, log_space: bool | None = None):
    """(||grad f||_1, E|f|, ratio) for the three-valued sign of x_1 + ... + x_n."""
    if n < 2 or n % 2:
        raise ValueError("majority_even needs even n >= 2")
    h = n // 2
    grad = binom_half(n, h, log_space) * math.sqrt(n) / 2 + binom_half(n, h + 1, log_space) * math.sqrt(h + 1)
    mean_abs = 1.0 - binom_half(n, h, log_space)
    return grad, mean_abs, mean_abs / grad


def clt_bernoulli(n: int) -> float:
    """E|eps_1 + ... + eps_n| / sqrt(n) for odd n."""
    if n < 1 or n % 2 == 0:
        raise ValueError("clt_bernoulli needs odd n")
    m = n - 1
    if m <= LOG_SPACE_ABOVE:
        central = math.comb(m, m // 2) / (1 << m)
    else:
        central = math.exp(log_comb(m, m // 2) - m * math.log(2.0))
    return n * central / math.sqrt(n)


def l1_growth(n: int) -> float:
    """sum_z max_i |m_{i,z}| = (1 - 2^-n)/n + sum_{k=1}^n Phi_n(k-1)/k."""
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(1, n + 1)
    if n <= 64:
        tails = phi_values(n, k - 1)
    else:
        tails = np.exp(phi_log(n, k - 1))
    head = -math.expm1(-n * math.log(2.0)) / n
    return float(head + np.sum(tails / k))


def l1_growth_integral(n: int) -> float:
    """int_0^1 (1 - ((1+rho)/2)^n) / (1 - rho) d rho + (2^n - 1)/(n 2^n)."""

    def f(rho):
        u = (1.0 + rho) / 2.0
        if rho == 1.0:
            return n / 2.0
        return -math.expm1(n * math.log(u)) / (1.0 - rho)

    val, _ = integrate.quad(f, 0.0, 1.0, limit=500, epsabs=1e-13, epsrel=1e-13)
    return val - math.expm1(-n * math.log(2.0)) / n


def l1_growth_enumerated(n: int) -> float:
    """Direct sum over all 2^n columns of the dense kernel matrix."""
    M = dense_matrix(kernel_table(n))
    return float(np.abs(M).max(axis=0).sum())


def lp_sum(n: int) -> float:
    """sum_{k=1}^{n-1} Phi_n(k) / sqrt(k (n - k)); tends to pi/2."""
    if n < 2:
        raise ValueError("lp_sum needs n >= 2")
    k = np.arange(1, n)
    tails = phi_values(n, k) if n <= 64 else np.exp(phi_log(n, k))
    return float(np.sum(tails / np.sqrt(k * (n - k))))


def _slice(n: int, k: int):
    """Masks of weight k (bit i set means z_i = -1)."""
    for c in combinations(range(n), k):
        yield sum(1 << i for i in c)


def x_value(n: int, k: int, zi: int) -> Fraction:
    """X_i^k = z_i / (1 + (1 - 2k/n) z_i), exactly."""
    return Fraction(zi) / (1 + (1 - Fraction(2 * k, n)) * zi)


@dataclass(frozen=True)
class GramReport:
    n: int
    k: int
    diag: Fraction
    offdiag: Fraction
    spectral_norm: Fraction
    cs_bound: float
    exact_match: bool
    numeric_norm: float


def gram_check(n: int, k: int) -> GramReport:
    """Conditional moments of X^k over the weight-k slice against their closed forms."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..n-1, got {k}")
    if n > SLICE_MAX:
        raise ValueError(f"slice enumeration limited to n <= {SLICE_MAX}")
    xp, xm = x_value(n, k, 1), x_value(n, k, -1)
    size = math.comb(n, k)
    first = [Fraction(0)] * n
    second = [[Fraction(0)] * n for _ in range(n)]
    for mask in _slice(n, k):
        x = [xm if (mask >> i) & 1 else xp for i in range(n)]
        for i in range(n):
            first[i] += x[i]
            for j in range(n):
                second[i][j] += x[i] * x[j]
    diag = Fraction(n * n, 4 * k * (n - k))
    off = -diag / (n - 1)
    ok = all(f == 0 for f in first)
    ok &= all(second[i][j] / size == (diag if i == j else off) for i in range(n) for j in range(n))
    norm = diag * n / (n - 1)
    G = np.array([[float(v / size) for v in row] for row in second])
    return GramReport(n, k, diag, off, norm, math.sqrt(norm), ok, float(np.linalg.norm(G, 2)))


def _slice_abs_means(n: int, lam: np.ndarray, include_k0: bool = True):
    """For each k: E[|sum lambda_i X_i^k| given d = k] and E[|sum_{z_i=-1} lambda_i| given d = k]."""
    xs, neg = {}, {}
    for k in range(n + 1):
        if k == 0 and not include_k0:
            xs[k], neg[k] = 0.0, 0.0
            continue
        xp = float(x_value(n, k, 1)) if k < n else 0.0
        xm = float(x_value(n, k, -1)) if k > 0 else 0.0
        acc, acc_neg, cnt = 0.0, 0.0, 0
        for mask in _slice(n, k):
            bits = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
            acc += abs(float(np.dot(lam, np.where(bits, xm, xp))))
            acc_neg += abs(float(lam[bits].sum()))
            cnt += 1
        xs[k], neg[k] = acc / cnt, acc_neg / cnt
    return xs, neg


def first_formula(n: int, lam) -> float:
    """(1/(n 2^(n-1))) sum_{k=0}^{n-1} sum_{r>k} C(n,r) E[|sum lambda_i X_i^k| given d = k]."""
    lam = np.asarray(getattr(lam, "coords", lam), dtype=float)
    xs, _ = _slice_abs_means(n, lam)
    return sum(2.0 * float(phi_values(n, np.array([k]))[0]) / n * xs[k] for k in range(n))


def decomposition_gap(n: int, lam) -> float:
    """|objective - first_formula|; bounded by 2/sqrt(n + 1)."""
    if not 1 <= n <= SLICE_MAX:
        raise ValueError(f"n must be in 1..{SLICE_MAX}")
    lam = np.asarray(getattr(lam, "coords", lam), dtype=float)
    gap = abs(objective(kernel_table(n), lam) - first_formula(n, lam))
    if gap > 2.0 / math.sqrt(n + 1) + 1e-12:
        raise AssertionError(f"decomposition gap {gap!r} exceeds 2/sqrt(n+1)")
    return gap


def discarded_term(n: int, lam) -> float:
    """2^-n sum_{k>=1} (1/k) C(n,k) E[|sum_{z_i=-1} lambda_i| given d = k]."""
    lam = np.asarray(getattr(lam, "coords", lam), dtype=float)
    _, neg = _slice_abs_means(n, lam)
    return sum(math.comb(n, k) / (1 << n) / k * neg[k] for k in range(1, n + 1))


def cdsecond_value(n: int, lam, include_k0: bool = True) -> float:
    """(2/n) sum_{k=0}^{floor(n/2)} E[|sum lambda_i X_i^k| given d = k].

    On the k = 0 slice every z_i = +1 and X_i^0 = 1/2, so the term is |sum lambda|/2.
    """
    if not 1 <= n <= SLICE_MAX:
        raise ValueError(f"n must be in 1..{SLICE_MAX}")
    lam = np.asarray(getattr(lam, "coords", lam), dtype=float)
    xs, _ = _slice_abs_means(n, lam, include_k0)
    return 2.0 / n * sum(xs[k] for k in range(n // 2 + 1))


SERIES = {
    "lp-sum": (lp_sum, math.pi / 2),
    "l1-growth": (l1_growth, None),
    "majority-odd": (lambda n: majority_odd(n)[0], 2 / math.sqrt(math.pi)),
    "majority-even": (lambda n: majority_even(n)[0], (1 + math.sqrt(2)) / math.sqrt(2 * math.pi)),
    "clt": (clt_bernoulli, math.sqrt(2 / math.pi)),
}


def series_points(name: str, ns) -> list:
    """SeriesPoint rows for a named sequence; l1-growth is referenced to ln n."""
    if name not in SERIES:
        raise KeyError(name)
    fn, ref = SERIES[name]
    return [SeriesPoint(n, fn(n), math.log(n) if ref is None else ref) for n in ns]


def default_indices(name: str, n_max: int) -> list:
    """Decades (and their odd/even neighbours where parity matters) up to n_max."""
    out = []
    d = 10
    while d <= n_max:
        if name in ("majority-odd", "clt"):
            out.append(d + 1 if d + 1 <= n_max else d - 1)
        else:
            out.append(d)
        d *= 10
    return out
