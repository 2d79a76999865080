"""Kernel matrix of T = int_0^inf grad P_t dt, binomial tails, and the l1 column objective.

The n x 2^n matrix M has entries m_{i,z} that depend only on d(z) (number of
-1 coordinates of z) and on the sign z_i:

    z_i = +1:  m_plus[k]  =  int_0^{1/2} t^k (1-t)^(n-k-1) dt
    z_i = -1:  m_minus[k] = -int_0^{1/2} t^(k-1) (1-t)^(n-k) dt

Both are rationals, built exactly with Fraction, with float mirrors for the
hot loops.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import stats

from ._gray import chunked_gray, coordinate_sums, natural_sums, popcounts
from .cube import CubeFunction, VectorField, _fwht

MAX_KERNEL_DIM = 30
EXACT_TAIL_MAX = 64
LOG_TAIL_MAX = 10**7
UNIT_TOL = 1e-12


def _half_beta(a: int, b: int) -> Fraction:
    """int_0^{1/2} t^a (1-t)^b dt for integers a, b >= 0, exactly."""
    total = Fraction(0)
    for j in range(b + 1):
        e = a + j + 1
        term = Fraction(math.comb(b, j), e * (1 << e))
        total += -term if j % 2 else term
    return total


@dataclass(frozen=True)
class KernelTable:
    """Exact kernel entries, compressed by (Hamming weight, sign).

    ``m_plus[k]`` is defined for k = 0..n-1 and ``m_minus[k]`` for k = 1..n;
    the unused slots (m_minus[0], m_plus[n]) hold 0 so both tuples have length
    n + 1 and index directly by weight.
    """

    n: int
    m_plus: tuple
    m_minus: tuple

    @property
    def plus(self) -> np.ndarray:
        return np.array([float(x) for x in self.m_plus])

    @property
    def minus(self) -> np.ndarray:
        return np.array([float(x) for x in self.m_minus])

    @property
    def alpha(self) -> np.ndarray:
        """Coefficient of sigma_i in m_{i,z} = alpha_k sigma_i + beta_k."""
        return _alpha_beta(self)[0]

    @property
    def beta(self) -> np.ndarray:
        return _alpha_beta(self)[1]

    def entry(self, i: int, z: int) -> Fraction:
        if not 0 <= i < self.n:
            raise IndexError(i)
        k = bin(z).count("1")
        return self.m_minus[k] if (z >> i) & 1 else self.m_plus[k]

    def to_json(self) -> str:
        def enc(vals):
            return [{"num": str(v.numerator), "den": str(v.denominator)} for v in vals]

        return json.dumps(
            {"n": self.n, "m_plus": enc(self.m_plus[: self.n]), "m_minus": enc(self.m_minus[1:])},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "KernelTable":
        data = json.loads(text)

        def dec(vals):
            return [Fraction(int(v["num"]), int(v["den"])) for v in vals]

        n = int(data["n"])
        plus = tuple(dec(data["m_plus"])) + (Fraction(0),)
        minus = (Fraction(0),) + tuple(dec(data["m_minus"]))
        return cls(n, plus, minus)


@lru_cache(maxsize=None)
def _alpha_beta(table: KernelTable):
    p, m = table.plus, table.minus
    return (p - m) / 2, (p + m) / 2


@lru_cache(maxsize=64)
def kernel_table(n: int) -> KernelTable:
    if not 1 <= n <= MAX_KERNEL_DIM:
        raise ValueError(f"kernel dimension must be in [1, {MAX_KERNEL_DIM}], got {n}")
    plus = tuple(_half_beta(k, n - k - 1) for k in range(n)) + (Fraction(0),)
    minus = (Fraction(0),) + tuple(-_half_beta(k - 1, n - k) for k in range(1, n + 1))
    return KernelTable(n, plus, minus)


@dataclass(frozen=True)
class BinomialTail:
    """Phi_n(k) = P[Binom(n, 1/2) > k]."""

    n: int
    k: int
    exact: Fraction | None
    log_value: float

    @property
    def value(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return math.exp(self.log_value)


def phi_exact(n: int, k: int) -> Fraction:
    """Exact tail, defined for -1 <= k <= n."""
    if k < -1 or k > n:
        raise ValueError(f"k={k} out of range for n={n}")
    return Fraction(sum(math.comb(n, r) for r in range(k + 1, n + 1)), 1 << n)


def phi_tail(n: int, k: int) -> BinomialTail:
    if n < 0 or n > LOG_TAIL_MAX:
        raise ValueError(f"n={n} out of range")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    if n <= EXACT_TAIL_MAX:
        ex = phi_exact(n, k)
        log_value = math.log(ex) if ex > 0 else -math.inf
        return BinomialTail(n, k, ex, log_value)
    return BinomialTail(n, k, None, float(phi_log(n, k)))


def phi_log(n: int, k):
    """log Phi_n(k) in double precision, vectorized over k."""
    k = np.asarray(k)
    with np.errstate(divide="ignore"):
        return stats.binom.logsf(k, n, 0.5)


def phi_values(n: int, ks) -> np.ndarray:
    """Phi_n(k) as floats, vectorized; exact rationals for small n."""
    ks = np.asarray(ks)
    if n <= EXACT_TAIL_MAX:
        return np.array([float(phi_exact(n, int(k))) for k in ks.ravel()]).reshape(ks.shape)
    return stats.binom.sf(ks, n, 0.5)


def dense_matrix(table: KernelTable) -> np.ndarray:
    """Full n x 2^n float matrix, columns indexed by mask. Test oracle only."""
    n = table.n
    if n > 12:
        raise ValueError("dense kernel matrix is only built for n <= 12")
    z = np.arange(1 << n)
    bits = ((z[None, :] >> np.arange(n)[:, None]) & 1).astype(bool)
    k = popcounts(n)
    return np.where(bits, table.minus[k][None, :], table.plus[k][None, :])


def _kernel_rows(table: KernelTable) -> np.ndarray:
    n = table.n
    k = popcounts(n)
    z = np.arange(1 << n)
    rows = np.empty((n, 1 << n))
    for i in range(n):
        neg = ((z >> i) & 1).astype(bool)
        rows[i] = np.where(neg, table.minus[k], table.plus[k])
    return rows


def apply_kernel(table: KernelTable, g: CubeFunction) -> VectorField:
    """(T g)_i(x) = x_i sum_z m_{i,z} g(z * x), as an XOR convolution over masks."""
    if g.n != table.n:
        raise ValueError(f"dimension mismatch: table n={table.n}, g n={g.n}")
    n = table.n
    size = 1 << n
    gh = _fwht(g.values)
    z = np.arange(size)
    out = np.empty((n, size))
    for i, row in enumerate(_kernel_rows(table)):
        conv = _fwht(_fwht(row) * gh) / size
        sign = 1.0 - 2.0 * ((z >> i) & 1)
        out[i] = sign * conv
    return VectorField.from_array(n, out)


def _check_unit(lam: np.ndarray) -> None:
    norm = float(np.linalg.norm(lam))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"lambda must be a unit vector, got norm {norm!r}")


def objective(table: KernelTable, lam) -> float:
    """||M^T lam||_1 = sum_z |sum_i lam_i m_{i,z}|, columns in reflected Gray order from z = 0."""
    lam = np.asarray(getattr(lam, "coords", lam), dtype=float)
    if lam.shape != (table.n,):
        raise ValueError(f"lambda must have length {table.n}")
    _check_unit(lam)
    alpha, beta = _alpha_beta(table)
    total_lam = float(lam.sum())
    # <lam, sigma(z)> starts at sum(lam) and drops by 2 lam_j per flipped coordinate
    acc = 0.0
    for k, s in chunked_gray(-2.0 * lam):
        acc += float(np.abs(alpha[k] * (total_lam + s) + beta[k] * total_lam).sum())
    return acc


def columns(table: KernelTable, lam: np.ndarray) -> np.ndarray:
    """M^T lam in natural mask order."""
    n = table.n
    alpha, beta = _alpha_beta(table)
    total = float(np.sum(lam))
    s = natural_sums(-2.0 * np.asarray(lam, dtype=float), base=total)
    k = popcounts(n)
    return alpha[k] * s + beta[k] * total


def matvec(table: KernelTable, u: np.ndarray) -> np.ndarray:
    """M u for u indexed by natural mask."""
    n = table.n
    alpha, beta = _alpha_beta(table)
    k = popcounts(n)
    w = alpha[k] * u
    parts = coordinate_sums(w, n)
    # sigma_i = +1 on bit-clear masks, -1 on bit-set masks
    return parts[:, 0] - parts[:, 1] + float(np.dot(beta[k], u))
