"""Gaussian isoperimetric profile I = phi(Phi^-1) and the pointwise inequalities built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .cube import CubeFunction

SQRT_2PI = math.sqrt(2.0 * math.pi)
GRID_MARGIN = 5e-4


def norm_cdf(x):
    return special.ndtr(x)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def norm_ppf(u):
    """Phi^-1 with two Newton polishing steps on the lower half, reflected above 1/2."""
    u = np.asarray(u, dtype=float)
    lower = np.minimum(u, 1.0 - u)
    x = special.ndtri(lower)
    for _ in range(2):
        dens = norm_pdf(x)
        step = np.where(dens > 0, (special.ndtr(x) - lower) / np.where(dens > 0, dens, 1.0), 0.0)
        x = x - step
    return np.where(u > 0.5, -x, x)


def _check_open(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0.0) | (x >= 1.0)) or np.any(np.isnan(x)):
        raise ValueError("arguments must lie strictly inside (0, 1)")
    return x


def profile_eval(x):
    """(I(x), I'(x), I''(x)) with I' = -Phi^-1 and I'' = -1/I."""
    x = _check_open(x)
    q = norm_ppf(x)
    i0 = norm_pdf(q)
    out = (i0, -q, -1.0 / i0)
    if x.ndim == 0:
        return tuple(float(v) for v in out)
    return out


def isoperimetric(x):
    """I extended by I(0) = I(1) = 0."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("arguments must lie in [0, 1]")
    inner = np.clip(x, 1e-300, 1.0 - 1e-16)
    vals = norm_pdf(norm_ppf(inner))
    return np.where((x <= 0.0) | (x >= 1.0), 0.0, vals)


def two_point_defect(a, b, k):
    """I(b) - I(a) - I'(b)(b - a) - k (a - b)^2 / 2."""
    a, b = _check_open(a), _check_open(b)
    ia, _, _ = profile_eval(a)
    ib, dib, _ = profile_eval(b)
    return ib - ia - dib * (b - a) - 0.5 * k * (a - b) ** 2


def defect_grid(size: int = 2001, k: float = SQRT_2PI, margin: float = GRID_MARGIN):
    """Grid points and defect matrix; rows index a, columns index b."""
    g = np.linspace(margin, 1.0 - margin, size)
    i, di, _ = profile_eval(g)
    diff = g[None, :] - g[:, None]  # b - a
    d = i[None, :] - i[:, None] - di[None, :] * diff - 0.5 * k * diff**2
    return g, d


def min_two_point_defect(size: int = 2001, k: float = SQRT_2PI) -> float:
    return float(defect_grid(size, k)[1].min())


def curvature_value(a, b, c):
    """I(b) - I(a) - I'(b)(b - a) + (c/2) I''(b)(a - b)^2."""
    a, b = _check_open(a), _check_open(b)
    ia, _, _ = profile_eval(a)
    ib, dib, d2ib = profile_eval(b)
    return ib - ia - dib * (b - a) + 0.5 * c * d2ib * (a - b) ** 2


@dataclass(frozen=True)
class Witness:
    a: float
    b: float
    value: float


def two_point_curvature_fails(c: float) -> Witness:
    """Most negative point of the I''-weighted two-point inequality on a = 1/2, b = 10^-2 .. 10^-12.

    Smaller exponents are tried if nothing in that range is negative.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    exponents = list(range(2, 13))
    best = None
    while True:
        for e in exponents:
            b = 10.0 ** (-e)
            v = float(curvature_value(0.5, b, c))
            if v < 0 and (best is None or v < best.value):
                best = Witness(0.5, b, v)
        if best is not None:
            return best
        if exponents[-1] >= 300:
            raise ArithmeticError(f"no witness found for c={c!r} down to b=1e-300")
        exponents = list(range(exponents[-1] + 1, min(exponents[-1] + 50, 300) + 1))


class NonConcave(ValueError):
    pass


def mb_functional(B_values, B_second_values) -> float:
    """max B / min(-B'') over the sampled grid."""
    B = np.asarray(B_values, dtype=float)
    neg2 = -np.asarray(B_second_values, dtype=float)
    if B.shape != neg2.shape or B.size == 0:
        raise ValueError("B and B'' samples must be non-empty and aligned")
    if np.any(~(neg2 > 0)):
        raise NonConcave("-B'' must be positive on the whole grid")
    return float(B.max() / neg2.min())


def power_family(a: float):
    """B(x) = (x(1-x))^a and its second derivative."""

    def B(x):
        return (x * (1 - x)) ** a

    def B2(x):
        u = x * (1 - x)
        return a * (a - 1) * u ** (a - 2) * (1 - 2 * x) ** 2 - 2 * a * u ** (a - 1)

    return B, B2


def mb_of(B, B2, grid=None) -> float:
    if grid is None:
        grid = np.linspace(1e-3, 1 - 1e-3, 20001)
    return mb_functional(B(grid), B2(grid))


def mb_profile(grid=None) -> float:
    if grid is None:
        grid = np.linspace(1e-3, 1 - 1e-3, 20001)
    i, _, d2 = profile_eval(grid)
    return mb_functional(i, d2)


def family_mb(exponents=None, grid=None) -> dict:
    """M_B for I and (x(1-x))^a; nonconcave members map to inf."""
    if exponents is None:
        exponents = np.round(np.arange(0.6, 1.4001, 0.1), 10)
    out = {"I": mb_profile(grid)}
    for a in exponents:
        try:
            out[float(a)] = mb_of(*power_family(float(a)), grid)
        except NonConcave:
            out[float(a)] = math.inf
    return out


def chain_constant(m: float) -> float:
    """pi sqrt(2 M): sqrt(pi) at M = 1/(2 pi), pi/2 at M = 1/8."""
    return math.pi * math.sqrt(2.0 * m)


def two_value_constant(grid_size: int = 200001):
    """max over p of 2p(1-p)/I(p) and its argmax; grid is odd-sized so it contains 1/2."""
    if grid_size % 2 == 0:
        grid_size += 1
    p = np.linspace(0.0, 1.0, grid_size)[1:-1]
    i, _, _ = profile_eval(p)
    r = 2 * p * (1 - p) / i
    j = int(np.argmax(r))
    return float(r[j]), float(p[j])


def _half_differences(values: np.ndarray, n: int) -> np.ndarray:
    """(f(x) - f(x with coordinate i flipped)) / 2, shape (..., n, 2^n)."""
    z = np.arange(1 << n)
    return np.stack([(values - values[..., z ^ (1 << i)]) / 2.0 for i in range(n)], axis=-2)


def bobkov_check(f: CubeFunction) -> float:
    """E sqrt(I(f)^2 + |grad f|^2) - I(E f); nonnegative by Bobkov's inequality."""
    v = f.values
    if np.any(v < 0.0) or np.any(v > 1.0):
        raise ValueError("f must take values in [0, 1]")
    return float(bobkov_defects(v[None, :], f.n)[0])


def bobkov_defects(values: np.ndarray, n: int) -> np.ndarray:
    """Batch version over rows of a (m, 2^n) array."""
    values = np.asarray(values, dtype=float)
    grad = _half_differences(values, n)
    lhs = np.sqrt(isoperimetric(values) ** 2 + (grad**2).sum(axis=-2)).mean(axis=-1)
    return lhs - isoperimetric(values.mean(axis=-1))


def boundary_measure(indicator: CubeFunction) -> float:
    """E|grad 1_A| with half-difference gradients."""
    grad = _half_differences(indicator.values, indicator.n)
    return float(np.sqrt((grad**2).sum(axis=0)).mean())


@dataclass(frozen=True)
class SymmetricSetReport:
    c1: float
    c2: float
    ana_max: float
    ana_argmax: float


def symmetric_set_constants(grid_size: int = 20001) -> SymmetricSetReport:
    i34, _, _ = profile_eval(0.75)
    i12, _, _ = profile_eval(0.5)
    c2 = 1.0 / (4.0 * math.sqrt(2.0) * i34)
    c1 = 1.0 / (2.0 * math.sqrt(2.0) * i12)
    if not c2 < c1:
        raise AssertionError("expected c2 < c1")
    if grid_size % 2 == 0:
        grid_size += 1
    alpha = np.linspace(0.0, 1.0, grid_size)[1:-1]
    ia, _, _ = profile_eval(alpha)
    vals = 2 * alpha * (1 - alpha) / (math.sqrt(2.0) * ia)
    j = int(np.argmax(vals))
    return SymmetricSetReport(c1, c2, float(vals[j]), float(alpha[j]))
