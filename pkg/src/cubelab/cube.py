"""Walsh-Fourier calculus on the Hamming cube {-1,1}^n.

Vertices are stored by bitmask: bit i set means x_i = -1, so the all-ones
vertex is mask 0 and the Hamming distance to it is the popcount. Coordinates
are 0-based throughout (``x_0, ..., x_{n-1}``).

Every operator is diagonal (or a mask shuffle) on the Walsh spectrum, so the
implementation transforms once, acts on coefficients, and transforms back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._gray import popcounts

MAX_DIM = 30
CURL_TOL = 1e-12


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {n}")


def _fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard butterfly: out[S] = sum_z a[z] (-1)^{|S & z|}."""
    a = np.array(a, dtype=float)
    size = a.size
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(size)


@dataclass(frozen=True)
class CubeFunction:
    """Real function on {-1,1}^n, values indexed by vertex mask."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_dim(self.n)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} values, got shape {values.shape}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[np.ndarray], float]) -> "CubeFunction":
        """Build from fn(x) where x is a length-n array of +-1."""
        pts = points(n)
        return cls(n, np.array([fn(x) for x in pts], dtype=float))

    @classmethod
    def constant(cls, n: int, c: float = 1.0) -> "CubeFunction":
        return cls(n, np.full(1 << n, float(c)))

    @classmethod
    def monomial(cls, n: int, coords: Sequence[int]) -> "CubeFunction":
        """x^S for S given as a collection of 0-based coordinates."""
        mask = 0
        for i in coords:
            if not 0 <= i < n:
                raise IndexError(f"coordinate {i} out of range for n={n}")
            mask |= 1 << i
        return cls(n, _character(n, mask))

    @classmethod
    def coordinate(cls, n: int, i: int) -> "CubeFunction":
        return cls.monomial(n, [i])

    def mean(self) -> float:
        return float(self.values.mean())

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def __add__(self, other):
        if isinstance(other, CubeFunction):
            _same_dim(self, other)
            return CubeFunction(self.n, self.values + other.values)
        return CubeFunction(self.n, self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, CubeFunction):
            _same_dim(self, other)
            return CubeFunction(self.n, self.values - other.values)
        return CubeFunction(self.n, self.values - float(other))

    def __mul__(self, other):
        if isinstance(other, CubeFunction):
            _same_dim(self, other)
            return CubeFunction(self.n, self.values * other.values)
        return CubeFunction(self.n, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return CubeFunction(self.n, -self.values)


@dataclass(frozen=True)
class WalshSpectrum:
    """Coefficients of f in the monomial basis; coeffs[S] multiplies x^S."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_dim(self.n)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients, got shape {coeffs.shape}")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    def degrees(self) -> np.ndarray:
        return popcounts(self.n)


@dataclass(frozen=True)
class VectorField:
    """Map from the cube to R^n; component i is a CubeFunction."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("vector field needs at least one component")
        n = comps[0].n
        if any(c.n != n for c in comps):
            raise ValueError("all components must share the same dimension")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return self.components[0].n

    def as_array(self) -> np.ndarray:
        """Shape (len(components), 2^n)."""
        return np.stack([c.values for c in self.components])

    @classmethod
    def from_array(cls, n: int, arr) -> "VectorField":
        return cls(tuple(CubeFunction(n, row) for row in np.asarray(arr, dtype=float)))

    def __getitem__(self, i: int) -> CubeFunction:
        return self.components[i]

    def __len__(self) -> int:
        return len(self.components)


def _same_dim(f: CubeFunction, g: CubeFunction) -> None:
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")


def _character(n: int, mask: int) -> np.ndarray:
    z = np.arange(1 << n)
    parity = popcounts(n)[z & mask] & 1 if mask else np.zeros(1 << n, dtype=np.int64)
    return 1.0 - 2.0 * parity


def points(n: int) -> np.ndarray:
    """All vertices as a (2^n, n) array of +-1, row index == mask."""
    z = np.arange(1 << n)[:, None]
    return 1 - 2 * ((z >> np.arange(n)) & 1)


def walsh_transform(f: CubeFunction) -> WalshSpectrum:
    return WalshSpectrum(f.n, _fwht(f.values) / (1 << f.n))


def inverse_walsh(s: WalshSpectrum) -> CubeFunction:
    return CubeFunction(s.n, _fwht(s.coeffs))


def _spectral(f: CubeFunction, multiplier: np.ndarray) -> CubeFunction:
    c = _fwht(f.values) / (1 << f.n)
    return CubeFunction(f.n, _fwht(c * multiplier))


def _check_coord(f: CubeFunction, i: int) -> None:
    if not 0 <= i < f.n:
        raise IndexError(f"coordinate {i} out of range for n={f.n}")


def partial(f: CubeFunction, i: int) -> CubeFunction:
    """Elimination of x_i: half the difference across flipping coordinate i."""
    _check_coord(f, i)
    c = walsh_transform(f).coeffs
    bit = 1 << i
    idx = np.arange(c.size)
    out = np.zeros_like(c)
    has = (idx & bit) != 0
    out[idx[has] ^ bit] = c[has]
    return inverse_walsh(WalshSpectrum(f.n, out))


def creation(f: CubeFunction, i: int) -> CubeFunction:
    """Adjoint of partial: x^S -> x_i x^S if i not in S, else 0."""
    _check_coord(f, i)
    c = walsh_transform(f).coeffs
    bit = 1 << i
    idx = np.arange(c.size)
    out = np.zeros_like(c)
    free = (idx & bit) == 0
    out[idx[free] | bit] = c[free]
    return inverse_walsh(WalshSpectrum(f.n, out))


def gradient(f: CubeFunction) -> VectorField:
    c = walsh_transform(f).coeffs
    idx = np.arange(c.size)
    comps = []
    for i in range(f.n):
        bit = 1 << i
        out = np.zeros_like(c)
        has = (idx & bit) != 0
        out[idx[has] ^ bit] = c[has]
        comps.append(CubeFunction(f.n, _fwht(out)))
    return VectorField(tuple(comps))


def laplacian(f: CubeFunction) -> CubeFunction:
    """Negative operator: x^S -> -|S| x^S."""
    return _spectral(f, -popcounts(f.n).astype(float))


def semigroup(f: CubeFunction, t: float) -> CubeFunction:
    """Heat semigroup P_t = exp(t * laplacian)."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    return _spectral(f, np.exp(-t * popcounts(f.n)))


def center(f: CubeFunction) -> CubeFunction:
    """P_0 f = f - E f."""
    return f - f.mean()


def inv_laplacian_p0(f: CubeFunction) -> CubeFunction:
    deg = popcounts(f.n).astype(float)
    mult = np.zeros_like(deg)
    mult[1:] = -1.0 / deg[1:]
    return _spectral(f, mult)


def t_operator(g: CubeFunction) -> VectorField:
    """T g = integral over t >= 0 of grad P_t g.

    Component i sends x^S to x^{S minus i} / |S| when i is in S.
    """
    minus_inv = inv_laplacian_p0(g)
    return VectorField(tuple(-partial(minus_inv, i) for i in range(g.n)))


def sup_ell2_norm(v: VectorField) -> float:
    """max over vertices of the Euclidean length of the field."""
    arr = v.as_array()
    return float(np.sqrt((arr**2).sum(axis=0)).max())


def curl_residual(h: VectorField) -> CubeFunction:
    """sum_k creation(h_k, k); h lies in the Curl space iff this vanishes."""
    if len(h) != h.n:
        raise ValueError("curl residual needs exactly n components")
    total = CubeFunction.constant(h.n, 0.0)
    for k, comp in enumerate(h.components):
        total = total + creation(comp, k)
    return total


def in_curl(h: VectorField, tol: float = CURL_TOL) -> bool:
    return curl_residual(h).sup_norm() <= tol


def midrange_sup(f: CubeFunction) -> float:
    """inf over constants a of ||f + a||_inf, attained at a = -(max+min)/2."""
    return 0.5 * float(f.values.max() - f.values.min())


def graph_inequality_ratio(F: CubeFunction) -> float:
    """||grad F||_{L^inf(l^2)} / inf_a ||lap F + a||_inf.

    Bounded by the dual constant of the cube in dimension n.
    """
    denom = midrange_sup(laplacian(F))
    if denom <= 1e-14 * max(1.0, F.sup_norm()):
        raise ValueError("graph inequality ratio undefined for constant F")
    return sup_ell2_norm(gradient(F)) / denom
