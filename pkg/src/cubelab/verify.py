"""Invariant groups and the reference constant table, as run by ``cubelab verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import asymptotics as asy
from . import cube, dualnorm, khintchine, profile
from .kernel import kernel_table, phi_exact

CONSTANTS = {
    "pi/2": math.pi / 2,
    "sqrt(pi/2)": math.sqrt(math.pi / 2),
    "2/sqrt(pi)": 2 / math.sqrt(math.pi),
    "(1+sqrt2)/sqrt(2pi)": (1 + math.sqrt(2)) / math.sqrt(2 * math.pi),
    "sqrt(pi)/2": math.sqrt(math.pi) / 2,
    "sqrt(2pi)": math.sqrt(2 * math.pi),
    "1/8": 1 / 8,
    "1/(2pi)": 1 / (2 * math.pi),
}


@dataclass(frozen=True)
class GroupResult:
    name: str
    passed: bool
    detail: str


def _operators(rng) -> str:
    worst = 0.0
    for n in range(1, 9):
        f = cube.CubeFunction(n, rng.standard_normal(1 << n))
        g = cube.CubeFunction(n, rng.standard_normal(1 << n))
        for i in range(n):
            lhs = (cube.partial(f, i) * g).mean()
            rhs = (f * cube.creation(g, i)).mean()
            worst = max(worst, abs(lhs - rhs))
        s, t = rng.random(2)
        worst = max(worst, np.abs(cube.semigroup(cube.semigroup(f, s), t).values - cube.semigroup(f, s + t).values).max())
        lhs = cube.gradient(cube.semigroup(f, t)).as_array()
        rhs = math.exp(-t) * np.stack([cube.semigroup(c, t).values for c in cube.gradient(f).components])
        worst = max(worst, np.abs(lhs - rhs).max())
        res = cube.curl_residual(cube.t_operator(g)).values - cube.center(g).values
        worst = max(worst, np.abs(res).max())
    if worst > 1e-12:
        raise AssertionError(f"operator identity residual {worst:.3e}")
    return f"max residual {worst:.2e} over n <= 8"


def _kernel_exact(_rng) -> str:
    for n in range(1, 21):
        t = kernel_table(n)
        for k in range(n):
            if t.m_plus[k] != phi_exact(n, k) / ((n - k) * math.comb(n, k)):
                raise AssertionError(f"m_plus tail identity fails at n={n}, k={k}")
        for k in range(1, n + 1):
            if -t.m_minus[k] != phi_exact(n, k - 1) / (k * math.comb(n, k)):
                raise AssertionError(f"m_minus tail identity fails at n={n}, k={k}")
        row = t.m_plus[0] + sum(
            math.comb(n - 1, k) * t.m_plus[k] + math.comb(n - 1, k - 1) * t.m_minus[k] for k in range(1, n + 1)
        )
        if row != 0:
            raise AssertionError(f"row sum nonzero at n={n}")
        if t.m_plus[0] != (1 - Fraction(1, 1 << n)) / n:
            raise AssertionError(f"m_plus[0] closed form fails at n={n}")
    return "tail identities and zero row sums exact for n <= 20"


def _dual_oracle(_rng) -> str:
    cfg = dualnorm.DualConfig(restarts=50)
    for n in range(1, 5):
        bf = dualnorm.brute_force_norm(n).value
        ms = dualnorm.multistart(n, cfg).value
        if abs(bf - ms) > 1e-12:
            raise AssertionError(f"multistart {ms!r} != brute force {bf!r} at n={n}")
    return "multistart equals brute force for n <= 4"


def _khintchine(_rng) -> str:
    cb = khintchine.certify_epsilon(0.75)
    if not (cb.epsilon > 0 and cb.q_upper < 1 and cb.branch2 < 0.97):
        raise AssertionError("certificate at p = 3/4 failed")
    for n in range(1, 5):
        if not khintchine.q_exact_small(0.75, n) <= cb.q_upper + 1e-12:
            raise AssertionError("exact q exceeds certified bound")
    bound = khintchine.improved_cdual_bound(200)
    if not bound < math.pi / 2 - 1e-3:
        raise AssertionError(f"improved bound {bound!r} not below pi/2 - 1e-3")
    return f"eps(3/4) = {cb.epsilon:.3e}, improved bound {bound:.6f}"


def _profile(_rng) -> str:
    g = np.linspace(1e-6, 1 - 1e-6, 10_000)
    i, _, d2 = profile.profile_eval(g)
    if np.abs(i * d2 + 1).max() > 1e-9:
        raise AssertionError("I * I'' != -1")
    m = profile.min_two_point_defect(2001)
    if m < -1e-12:
        raise AssertionError(f"two-point defect {m!r}")
    v = profile.two_point_defect(0.5 + 5e-4, 0.5 - 5e-4, profile.SQRT_2PI * 1.001)
    if not v < 0:
        raise AssertionError("no two-point violation above sqrt(2 pi)")
    w = profile.two_point_curvature_fails(1.0)
    return f"min defect {m:.2e}; curvature witness b={w.b:.0e}"


def _bellman(_rng) -> str:
    mx = profile.mb_of(lambda x: x * (1 - x), lambda x: -2.0 + 0 * x)
    mi = profile.mb_profile()
    if mx != 0.125 or abs(mi - 1 / (2 * math.pi)) > 1e-9:
        raise AssertionError(f"M_B values {mx!r}, {mi!r}")
    c_i, c_x = profile.chain_constant(mi), profile.chain_constant(mx)
    if abs(c_i - math.sqrt(math.pi)) > 1e-8 or abs(c_x - math.pi / 2) > 1e-12:
        raise AssertionError("chain constants mismatch")
    val, _ = profile.two_value_constant()
    if abs(val - math.sqrt(math.pi / 2)) > 1e-6:
        raise AssertionError("two-value constant mismatch")
    return f"M = 1/8 -> {c_x:.12f}; M = 1/(2pi) -> {c_i:.12f}"


def _asymptotics(_rng) -> str:
    if abs(asy.clt_bernoulli(9) - 0.8203) > 5e-5 or round(asy.clt_bernoulli(13), 2) != 0.81:
        raise AssertionError("Bernoulli CLT values")
    if abs(asy.majority_odd(1001)[0] - 2 / math.sqrt(math.pi)) > 1e-3:
        raise AssertionError("majority_odd(1001)")
    if abs(asy.majority_even(1000)[0] - CONSTANTS["(1+sqrt2)/sqrt(2pi)"]) > 2e-3:
        raise AssertionError("majority_even(1000)")
    gaps = [math.pi / 2 - asy.lp_sum(n) for n in (100, 1000, 10_000)]
    if not (gaps[0] > gaps[1] > gaps[2] and abs(gaps[2]) < 0.05):
        raise AssertionError(f"lp_sum gaps {gaps}")
    for n in (10, 100, 1000, 10_000):
        if abs(asy.l1_growth(n) - math.log(n)) > 2:
            raise AssertionError(f"l1_growth band at n={n}")
    return f"lp gap at 1e4 = {gaps[2]:.4f}"


def _gram(_rng) -> str:
    for n in range(2, 11):
        for k in range(1, n):
            if not asy.gram_check(n, k).exact_match:
                raise AssertionError(f"Gram moments at n={n}, k={k}")
    return "exact for n <= 10, all k"


GROUPS = {
    "operators": _operators,
    "kernel": _kernel_exact,
    "dual": _dual_oracle,
    "khintchine": _khintchine,
    "profile": _profile,
    "bellman": _bellman,
    "asymptotics": _asymptotics,
    "gram": _gram,
}


def run_groups(seed: int = 42, names=None) -> list:
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in GROUPS.items():
        if names is not None and name not in names:
            continue
        try:
            results.append(GroupResult(name, True, fn(rng)))
        except AssertionError as exc:
            results.append(GroupResult(name, False, str(exc)))
    return results
