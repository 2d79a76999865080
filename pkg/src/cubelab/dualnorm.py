"""The infinity-to-2 norm of the kernel matrix: alternating ascent, multistart, brute force.

||M||_{inf->2} = max over unit lambda of ||M^T lambda||_1 = max over sign vectors u of ||M u||_2.
The ascent alternates between the two descriptions; every step is a
nondecreasing move on a convex functional, so it terminates at a fixed point
or a repeated sign pattern.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import _io
from .cube import CubeFunction
from .kernel import KernelTable, columns, kernel_table, matvec, objective

UNIT_TOL = 1e-12
STOP_TOL = 1e-13
MONOTONE_SLACK = 1e-12
MAX_ITER = 10_000
BRUTE_MAX = 4
MULTISTART_MAX = 26
SQRT_HALF_PI = math.sqrt(math.pi / 2)


class DegenerateStart(ValueError):
    """M u vanished: the start is orthogonal to every column."""


@dataclass(frozen=True)
class SphereVector:
    n: int
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).copy()
        if coords.shape != (self.n,):
            raise ValueError(f"expected {self.n} coordinates, got shape {coords.shape}")
        norm = float(np.linalg.norm(coords))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector: norm {norm!r}")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @classmethod
    def normalized(cls, v) -> "SphereVector":
        v = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v.size, v / norm)

    @classmethod
    def basis(cls, n: int, i: int) -> "SphereVector":
        e = np.zeros(n)
        e[i] = 1.0
        return cls(n, e)

    @classmethod
    def uniform(cls, n: int) -> "SphereVector":
        return cls(n, np.full(n, 1.0 / math.sqrt(n)))

    def padded(self) -> "SphereVector":
        """Embed into dimension n + 1 with a trailing zero."""
        return SphereVector(self.n + 1, np.append(self.coords, 0.0))


@dataclass(frozen=True)
class DualNormReport:
    """Best value found for C_dual,n. A lower bound unless ``certified``."""

    n: int
    value: float
    lam: SphereVector
    certified: bool
    restarts: int
    total_iterations: int
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = self.lam.coords.tolist()
        del d["lam"]
        return d

    def to_json(self) -> str:
        return _io.json_text(self.to_dict())


@dataclass(frozen=True)
class AscentTrace:
    values: tuple
    iterations: int
    stopped_by: str


def _ascent(table: KernelTable, lam: np.ndarray, max_iter: int = MAX_ITER):
    values = []
    seen = set()
    stopped_by = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        c = columns(table, lam)
        u = np.where(c >= 0.0, 1.0, -1.0)
        v = float(np.abs(c).sum())
        if values and v < values[-1] - MONOTONE_SLACK:
            raise AssertionError(f"ascent decreased the objective: {values[-1]!r} -> {v!r}")
        values.append(v)
        w = matvec(table, u)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            raise DegenerateStart("M u = 0; restart from a different lambda")
        if nw - v < STOP_TOL:
            stopped_by = "converged"
            break
        key = np.packbits(u > 0).tobytes()
        if key in seen:
            stopped_by = "cycle"
            break
        seen.add(key)
        lam = w / nw
    return lam, AscentTrace(tuple(values), it, stopped_by)


def alternating_ascent(table: KernelTable, lam0: SphereVector, max_iter: int = MAX_ITER):
    """Run u <- sign(M^T lam), lam <- M u / ||M u|| to a fixed point.

    Returns ``(SphereVector, value)`` with value == objective(table, lam).
    """
    if lam0.n != table.n:
        raise ValueError(f"dimension mismatch: lambda n={lam0.n}, table n={table.n}")
    lam, _ = _ascent(table, lam0.coords.copy(), max_iter)
    sv = SphereVector.normalized(lam)
    return sv, objective(table, sv)


def alternating_ascent_traced(table: KernelTable, lam0: SphereVector, max_iter: int = MAX_ITER):
    """Like alternating_ascent, also returning the per-iteration objective trace."""
    lam, trace = _ascent(table, lam0.coords.copy(), max_iter)
    sv = SphereVector.normalized(lam)
    return sv, objective(table, sv), trace


@dataclass(frozen=True)
class BruteForceResult:
    n: int
    value: float
    u: CubeFunction


@lru_cache(maxsize=None)
def brute_force_norm(n: int) -> BruteForceResult:
    """Exact max over all 2^(2^n) sign vectors of ||M u||_2 (n <= 4)."""
    if not 1 <= n <= BRUTE_MAX:
        raise ValueError(f"brute force only for 1 <= n <= {BRUTE_MAX}, got {n}")
    from .kernel import dense_matrix

    M = dense_matrix(kernel_table(n))
    size = 1 << n
    # u and -u give the same norm, so fix u[0] = +1
    codes = np.arange(1 << (size - 1), dtype=np.int64)
    bits = (codes[:, None] >> np.arange(size - 1)) & 1
    U = np.ones((codes.size, size))
    U[:, 1:] = 1.0 - 2.0 * bits
    norms = np.linalg.norm(U @ M.T, axis=1)
    best = int(np.argmax(norms))
    return BruteForceResult(n, float(norms[best]), CubeFunction(n, U[best]))


@dataclass(frozen=True)
class DualConfig:
    restarts: int | None = None  # None: 200 + 50 n
    seed: int = 42
    structured_starts: bool = True
    workers: int = 1
    max_iter: int = MAX_ITER

    def restarts_for(self, n: int) -> int:
        return 200 + 50 * n if self.restarts is None else self.restarts


def _random_start(n: int, seed: int) -> np.ndarray:
    g = np.random.default_rng(seed).standard_normal(n)
    while not np.any(g):
        g = np.random.default_rng(seed + 1).standard_normal(n)
    return g / np.linalg.norm(g)


def _run_start(table: KernelTable, lam: np.ndarray, max_iter: int):
    try:
        out, trace = _ascent(table, lam, max_iter)
    except DegenerateStart:
        return None
    sv = SphereVector.normalized(out)
    return sv, objective(table, sv), trace.iterations


def multistart(
    n: int,
    config: DualConfig = DualConfig(),
    previous: SphereVector | None = None,
    deadline: float | None = None,
) -> DualNormReport:
    """Best alternating-ascent value over structured and random starts.

    ``previous`` is the (n-1)-dimensional optimizer; when omitted and
    structured starts are on, it is computed recursively with the same config.
    ``deadline`` (a time.monotonic() value) stops random restarts early.
    """
    if not 1 <= n <= MULTISTART_MAX:
        raise ValueError(f"n must be in [1, {MULTISTART_MAX}], got {n}")
    table = kernel_table(n)
    starts = []
    if config.structured_starts:
        starts += [SphereVector.basis(n, i).coords for i in range(n)]
        starts.append(SphereVector.uniform(n).coords)
        if n > 1:
            if previous is None:
                previous = multistart(n - 1, config).lam
            if previous.n != n - 1:
                raise ValueError("previous optimizer must have dimension n - 1")
            starts.append(previous.padded().coords)
    n_random = config.restarts_for(n)

    def random_starts():
        for r in range(n_random):
            if deadline is not None and time.monotonic() > deadline:
                return
            yield _random_start(n, config.seed + r)

    all_starts = list(starts) + list(random_starts())
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(lambda s: _run_start(table, s, config.max_iter), all_starts))
    else:
        results = [_run_start(table, s, config.max_iter) for s in all_starts]

    best_val, best_lam, total_it = -math.inf, None, 0
    for res in results:
        if res is None:
            continue
        sv, val, iters = res
        total_it += iters
        # strict > keeps the earliest start on ties, so results do not depend on workers
        if val > best_val:
            best_val, best_lam = val, sv
    certified = False
    if n <= BRUTE_MAX:
        certified = abs(brute_force_norm(n).value - best_val) <= 1e-12
    return DualNormReport(
        n=n,
        value=float(best_val),
        lam=best_lam,
        certified=certified,
        restarts=len(all_starts) - len(starts),
        total_iterations=total_it,
        seed=config.seed,
    )


@dataclass
class Figure1:
    rows: list = field(default_factory=list)
    complete: bool = True

    def values(self) -> dict:
        return {r.n: r.value for r in self.rows}

    def to_csv(self) -> str:
        return _io.csv_text(
            ["n", "value", "certified", "restarts", "seed"],
            [(r.n, r.value, r.certified, r.restarts, r.seed) for r in self.rows],
        )

    def to_json(self) -> str:
        return _io.json_text({"complete": self.complete, "rows": [r.to_dict() for r in self.rows]})


def figure1(
    n_min: int,
    n_max: int,
    config: DualConfig = DualConfig(),
    budget: float | None = None,
) -> Figure1:
    """C_dual,n for n_min..n_max, each dimension seeded with the previous optimizer.

    With a time budget (seconds) the sweep stops after the dimension during
    which the budget ran out, and ``complete`` is set to False.
    """
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"invalid range {n_min}..{n_max}")
    deadline = None if budget is None else time.monotonic() + budget
    fig = Figure1()
    prev = None
    for n in range(1, n_max + 1):
        if deadline is not None and time.monotonic() > deadline:
            fig.complete = False
            break
        report = multistart(n, config, previous=prev, deadline=deadline)
        prev = report.lam
        if n >= n_min:
            fig.rows.append(report)
    _check_figure(fig)
    return fig


def _check_figure(fig: Figure1) -> None:
    last = None
    for r in fig.rows:
        if not 1.0 - 1e-12 <= r.value < math.pi / 2:
            raise AssertionError(f"C_dual,{r.n} = {r.value!r} outside [1, pi/2)")
        if r.n <= 13 and not r.value < SQRT_HALF_PI:
            raise AssertionError(f"C_dual,{r.n} = {r.value!r} not below sqrt(pi/2)")
        if last is not None and r.value < last - 1e-9:
            raise AssertionError(f"C_dual not monotone at n={r.n}")
        last = r.value
