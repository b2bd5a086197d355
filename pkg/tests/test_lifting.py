import math

import numpy as np
import pytest

from wavelab import catalog
from wavelab.errors import ConsistencyError
from wavelab.fd_oracle import FdGrid, compare, fd_solve
from wavelab.galerkin import NodalSource, solve_ivp
from wavelab.lifting import BoundaryData, build_lifting, check_consistency, solve_nonhomogeneous
from wavelab.spectral_core import EigenBasis, Interval, eigenfunctions

PI = math.pi


def basis(m):
    return EigenBasis(Interval(PI), m)


def test_consistency_examples():
    zero = BoundaryData()
    rep = check_consistency(None, None, zero, PI)
    assert rep.passed and all(r == 0 for r in rep.residuals.values())
    ramp = BoundaryData(catalog.const_t(1.0), catalog.const_t(0.0))
    assert check_consistency(lambda x: 1 - x / PI, None, ramp, PI).passed
    rep = check_consistency(None, None, ramp, PI)
    assert not rep.passed and rep.residuals["g0_vs_u0"] == 1.0


def test_lifting_closed_forms():
    x = np.linspace(0, PI, 7)
    lift = build_lifting(BoundaryData(catalog.const_t(1.0)), Interval(PI))
    np.testing.assert_allclose(lift.G(0.3, x), 1 - x / PI)
    zero = build_lifting(BoundaryData(), Interval(PI))
    assert np.all(zero.G(0.5, x) == 0) and np.all(zero.G_tt(0.5, x) == 0)
    sine = build_lifting(BoundaryData(catalog.sin_t()), Interval(PI))
    t = 0.7
    np.testing.assert_allclose(sine.G_tt(t, x), -math.sin(t) * (1 - x / PI), atol=1e-15)


def test_modified_source_formula():
    b = basis(4)
    lift = build_lifting(BoundaryData(catalog.sin_t()), Interval(PI))
    V = 2.0 + np.cos(b.nodes)
    f = NodalSource([catalog.const_t(1.0)], [np.sin(b.nodes)])
    star = lift.modified_source(f, V, b.nodes)
    t = 1.1
    expected = np.sin(b.nodes) + math.sin(t) * (1 - b.nodes / PI) - V * lift.G(t, b.nodes)
    np.testing.assert_allclose(star(t), expected, atol=1e-14)


def test_profile_coefficients_match_quadrature():
    b = EigenBasis(Interval(2.0), 16)
    lift = build_lifting(BoundaryData(), Interval(2.0))
    left, right = lift.profile_coefficients(16)
    np.testing.assert_allclose(left, b.weighted_node_values @ (1 - b.nodes / 2.0), atol=1e-13)
    np.testing.assert_allclose(right, b.weighted_node_values @ (b.nodes / 2.0), atol=1e-13)


def test_static_lift_keeps_constant():
    c = 1.7
    bd = BoundaryData(catalog.const_t(c), catalog.const_t(c))
    sol = solve_nonhomogeneous(None, None, catalog.const_x(c), None, bd, basis(32), 2.0, 1e-3)
    x = np.linspace(0, PI, 41)
    for n in (0, 500, sol.trajectory.n_samples - 1):
        assert np.max(np.abs(sol.values(n, x) - c)) <= 1e-9


def test_zero_boundary_reduces_to_plain_solve():
    b = basis(16)
    V = catalog.sin_x(1.0, 0.5)
    sol = solve_nonhomogeneous(V, None, catalog.bubble_x(), catalog.mode_x(2), BoundaryData(), b, 1.0, 1e-3)
    ref, _ = solve_ivp(V, None, catalog.bubble_x(), catalog.mode_x(2), b, 1.0, 1e-3)
    assert np.array_equal(sol.trajectory.d, ref.d)


def test_inconsistent_data_rejected():
    with pytest.raises(ConsistencyError):
        solve_nonhomogeneous(None, None, None, None, BoundaryData(catalog.const_t(1.0)), basis(8), 1.0, 1e-3)


@pytest.fixture(scope="module")
def sine_boundary():
    bd = BoundaryData(catalog.sin_t())
    u1 = catalog.SpaceFunction("linear_lift", (1.0, 0.0), PI)
    sol = solve_nonhomogeneous(None, None, None, u1, bd, basis(64), 1.0, 2.5e-4)
    return bd, u1, sol


def test_sine_boundary_trace(sine_boundary):
    bd, _, sol = sine_boundary
    left, right = sol.endpoint_traces()
    assert np.max(np.abs(left - np.sin(sol.trajectory.times))) <= 1e-6
    assert np.max(np.abs(right)) <= 1e-6
    assert math.isfinite(sol.estimate_ratio) and sol.estimate_ratio > 0


def test_sine_boundary_against_fd(sine_boundary):
    bd, u1, sol = sine_boundary
    fd = fd_solve(FdGrid.create(PI, 400, 2.5e-4, u1=u1), bdata=bd, T=1.0)
    assert compare(sol.trajectory, sol.system.basis, fd, [0.5, 1.0], sol.lifting) <= 1e-3


def test_gauge_shift():
    b = basis(32)
    c = 0.8
    f = NodalSource([catalog.cos_t()], [eigenfunctions(PI, 1, b.nodes)[0]])
    u0 = catalog.mode_x(1)
    base = solve_nonhomogeneous(None, f, u0, None, BoundaryData(), b, 1.0, 1e-3)
    shifted = solve_nonhomogeneous(None, f, lambda x: u0(x) + c, None,
                                   BoundaryData(catalog.const_t(c), catalog.const_t(c)), b, 1.0, 1e-3)
    x = np.linspace(0, PI, 33)
    n = base.trajectory.n_samples - 1
    assert np.max(np.abs(shifted.values(n, x) - base.values(n, x) - c)) <= 1e-9
