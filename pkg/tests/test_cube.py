import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cubelab import cube
from cubelab.cube import CubeFunction, VectorField

SQ = 3 / (2 * math.sqrt(2))


def fn(n, values):
    return CubeFunction(n, np.asarray(values, dtype=float))


def min12():
    # vertex order: (1,1), (-1,1), (1,-1), (-1,-1)
    return fn(2, [1, -1, -1, -1])


def cube_functions(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(np.float64, 1 << n, elements=st.floats(-10, 10, allow_nan=False)).map(
            lambda v: CubeFunction(n, v)
        )
    )


class TestConstruction:
    def test_length_checked(self):
        with pytest.raises(ValueError):
            CubeFunction(2, [1.0, 2.0, 3.0])

    def test_dimension_range(self):
        with pytest.raises(ValueError):
            CubeFunction(0, [1.0])
        with pytest.raises(ValueError):
            CubeFunction(31, np.zeros(1))

    def test_values_frozen(self):
        f = CubeFunction(1, [1.0, 2.0])
        with pytest.raises(ValueError):
            f.values[0] = 5.0

    def test_mask_convention(self):
        # bit i set means x_i = -1
        x0 = CubeFunction.coordinate(3, 0)
        assert list(x0.values) == [1, -1, 1, -1, 1, -1, 1, -1]
        pts = cube.points(3)
        assert (pts[5] == [-1, 1, -1]).all()

    def test_from_callable(self):
        f = CubeFunction.from_callable(2, lambda x: min(x))
        assert list(f.values) == [1, -1, -1, -1]


class TestWalsh:
    def test_constant(self):
        s = cube.walsh_transform(CubeFunction.constant(2))
        assert list(s.coeffs) == [1, 0, 0, 0]

    def test_single_monomial(self):
        s = cube.walsh_transform(CubeFunction.coordinate(1, 0))
        assert list(s.coeffs) == [0, 1]

    def test_round_trip(self, rng):
        f = fn(6, rng.standard_normal(64))
        back = cube.inverse_walsh(cube.walsh_transform(f))
        assert np.allclose(back.values, f.values, rtol=1e-12, atol=1e-12)

    def test_min_spectrum(self):
        # min(x1, x2) = (x1 x2 + x1 + x2 - 1) / 2
        assert np.allclose(cube.walsh_transform(min12()).coeffs, [-0.5, 0.5, 0.5, 0.5])

    @given(cube_functions())
    @settings(max_examples=60, deadline=None)
    def test_parseval(self, f):
        c = cube.walsh_transform(f).coeffs
        assert math.isclose((c**2).sum(), (f.values**2).mean(), rel_tol=1e-12, abs_tol=1e-12)

    @given(cube_functions())
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, f):
        back = cube.inverse_walsh(cube.walsh_transform(f)).values
        scale = max(1.0, np.abs(f.values).max())
        assert np.abs(back - f.values).max() <= 1e-12 * scale


class TestOperators:
    def test_partial_examples(self):
        assert np.allclose(cube.partial(CubeFunction.coordinate(1, 0), 0).values, 1)
        assert np.allclose(cube.partial(CubeFunction.coordinate(2, 1), 0).values, 0)
        x1x2 = CubeFunction.monomial(2, [0, 1])
        assert np.allclose(cube.partial(x1x2, 0).values, CubeFunction.coordinate(2, 1).values)

    def test_partial_is_half_difference(self, rng):
        f = fn(3, rng.standard_normal(8))
        d = cube.partial(f, 1).values
        z = np.arange(8)
        plus = np.where((z >> 1) & 1, f.values[z ^ 2], f.values)
        minus = np.where((z >> 1) & 1, f.values, f.values[z ^ 2])
        assert np.allclose(d, (plus - minus) / 2)

    def test_creation_examples(self):
        assert np.allclose(cube.creation(CubeFunction.constant(1), 0).values, [1, -1])
        assert np.allclose(cube.creation(CubeFunction.coordinate(1, 0), 0).values, 0)
        out = cube.creation(CubeFunction.coordinate(2, 1), 0)
        assert np.allclose(out.values, CubeFunction.monomial(2, [0, 1]).values)

    def test_coordinate_out_of_range(self):
        f = CubeFunction.constant(2)
        for op in (cube.partial, cube.creation):
            with pytest.raises(IndexError):
                op(f, 2)
            with pytest.raises(IndexError):
                op(f, -1)

    def test_spectral_examples(self):
        x1x2 = CubeFunction.monomial(2, [0, 1])
        assert np.allclose(cube.laplacian(x1x2).values, -2 * x1x2.values)
        x1 = CubeFunction.coordinate(1, 0)
        assert np.allclose(cube.semigroup(x1, math.log(2)).values, 0.5 * x1.values)
        assert np.allclose(cube.inv_laplacian_p0(x1 + 3).values, -x1.values)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            cube.semigroup(CubeFunction.constant(1), -0.1)

    def test_laplacian_is_neighbour_average(self, rng):
        n = 4
        f = fn(n, rng.standard_normal(16))
        z = np.arange(16)
        direct = sum((f.values[z ^ (1 << i)] - f.values) / 2 for i in range(n))
        assert np.allclose(cube.laplacian(f).values, direct)


class TestTOperator:
    def test_single_coordinate(self):
        t = cube.t_operator(CubeFunction.coordinate(1, 0))
        assert np.allclose(t[0].values, 1.0)

    def test_min_field(self):
        t = cube.t_operator(min12())
        x1, x2 = CubeFunction.coordinate(2, 0).values, CubeFunction.coordinate(2, 1).values
        assert np.allclose(t[0].values, x2 / 4 + 0.5)
        assert np.allclose(t[1].values, x1 / 4 + 0.5)

    def test_constant_gives_zero(self):
        t = cube.t_operator(CubeFunction.constant(3, 7.0))
        assert np.allclose(t.as_array(), 0)

    def test_matches_semigroup_integral(self, rng):
        # int_0^inf grad P_t g dt = int_0^1 grad P_{-ln s} g ds / s, a polynomial in s
        g = fn(3, rng.standard_normal(8))
        nodes, weights = np.polynomial.legendre.leggauss(8)
        s, w = (nodes + 1) / 2, weights / 2
        vals = np.stack([cube.gradient(cube.semigroup(g, -math.log(si))).as_array() / si for si in s])
        approx = np.tensordot(w, vals, axes=1)
        assert np.allclose(approx, cube.t_operator(g).as_array(), atol=1e-12)


class TestNorms:
    def test_sup_min(self):
        assert math.isclose(cube.sup_ell2_norm(cube.t_operator(min12())), SQ, rel_tol=1e-14)

    def test_zero(self):
        assert cube.sup_ell2_norm(VectorField.from_array(2, np.zeros((2, 4)))) == 0

    def test_unit_components(self):
        v = VectorField((CubeFunction.coordinate(2, 0), -CubeFunction.coordinate(2, 1)))
        assert math.isclose(cube.sup_ell2_norm(v), math.sqrt(2))

    def test_vector_field_dim_check(self):
        with pytest.raises(ValueError):
            VectorField((CubeFunction.constant(1), CubeFunction.constant(2)))


class TestCurl:
    def test_gradient_form_fields(self):
        # h_k = x_k d_k H lies in the curl space
        H = CubeFunction.monomial(2, [0, 1])
        h = VectorField(tuple(CubeFunction.coordinate(2, k) * cube.partial(H, k) for k in range(2)))
        assert cube.in_curl(h)

    def test_gradient_form_random(self, rng):
        for n in range(1, 6):
            H = fn(n, rng.standard_normal(1 << n))
            h = VectorField(tuple(CubeFunction.coordinate(n, k) * cube.partial(H, k) for k in range(n)))
            assert cube.curl_residual(h).sup_norm() <= 1e-12

    def test_constant_field(self):
        h = VectorField((CubeFunction.constant(2), CubeFunction.constant(2, 0.0)))
        assert np.allclose(cube.curl_residual(h).values, CubeFunction.coordinate(2, 0).values)
        assert not cube.in_curl(h)

    def test_needs_n_components(self):
        with pytest.raises(ValueError):
            cube.curl_residual(VectorField((CubeFunction.constant(2),)))

    def test_t_residual_is_centering(self, rng):
        for n in range(1, 7):
            g = fn(n, rng.standard_normal(1 << n))
            res = cube.curl_residual(cube.t_operator(g)).values
            assert np.abs(res - cube.center(g).values).max() <= 1e-12


class TestGraphRatio:
    def test_coordinate(self):
        assert math.isclose(cube.graph_inequality_ratio(CubeFunction.coordinate(1, 0)), 1.0)

    def test_min_potential(self):
        F = cube.inv_laplacian_p0(min12())
        assert math.isclose(cube.graph_inequality_ratio(F), SQ, rel_tol=1e-12)

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            cube.graph_inequality_ratio(CubeFunction.constant(3, 2.0))

    @given(cube_functions(max_n=8))
    @settings(max_examples=100, deadline=None)
    def test_below_half_pi(self, F):
        if cube.midrange_sup(cube.laplacian(F)) <= 1e-9:
            return
        assert cube.graph_inequality_ratio(F) < math.pi / 2


class TestIdentities:
    @given(cube_functions(max_n=8), cube_functions(max_n=8), st.data())
    @settings(max_examples=40, deadline=None)
    def test_adjointness(self, f, g, data):
        if f.n != g.n:
            g = CubeFunction(f.n, np.resize(g.values, 1 << f.n))
        i = data.draw(st.integers(0, f.n - 1))
        lhs = (cube.partial(f, i) * g).mean()
        rhs = (f * cube.creation(g, i)).mean()
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, np.abs(f.values).max() * np.abs(g.values).max())

    @given(cube_functions(max_n=8), st.floats(0, 5), st.floats(0, 5))
    @settings(max_examples=40, deadline=None)
    def test_semigroup_law(self, f, s, t):
        lhs = cube.semigroup(cube.semigroup(f, s), t).values
        rhs = cube.semigroup(f, s + t).values
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, f.sup_norm())

    @given(cube_functions(max_n=8))
    @settings(max_examples=30, deadline=None)
    def test_centering_idempotent(self, f):
        once = cube.center(f)
        assert np.abs(cube.center(once).values - once.values).max() <= 1e-12 * max(1.0, f.sup_norm())

    @given(cube_functions(max_n=8), st.floats(0, 4))
    @settings(max_examples=30, deadline=None)
    def test_gradient_commutes_with_semigroup(self, f, t):
        lhs = cube.gradient(cube.semigroup(f, t)).as_array()
        rhs = math.exp(-t) * np.stack([cube.semigroup(c, t).values for c in cube.gradient(f).components])
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, f.sup_norm())

    @given(cube_functions(max_n=8))
    @settings(max_examples=30, deadline=None)
    def test_t_identity(self, g):
        res = cube.curl_residual(cube.t_operator(g)).values - cube.center(g).values
        assert np.abs(res).max() <= 1e-12 * max(1.0, g.sup_norm())
