import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavelab import catalog
from wavelab.energy import (corollary_bounds, eta_of_t, gronwall_bound, m_norm, m_norm_difference,
                            verify_energy_estimate, xi_of_t)
from wavelab.errors import InvalidArgumentError, UnsupportedCheckError
from wavelab.galerkin import NodalSource, solve_ivp
from wavelab.spectral_core import EigenBasis, Interval

PI = math.pi


def basis(m):
    return EigenBasis(Interval(PI), m)


@pytest.fixture(scope="module")
def cos_mode():
    return solve_ivp(None, None, catalog.mode_x(1), None, basis(8), 2 * PI, 1e-3)


def test_eta_of_free_mode_is_one(cos_mode):
    traj, s = cos_mode
    assert np.max(np.abs(eta_of_t(traj, s) - 1.0)) <= 1e-6


def test_eta_zero_trajectory():
    traj, s = solve_ivp(None, None, None, None, basis(4), 1.0, 1e-2)
    assert np.all(eta_of_t(traj, s) == 0)
    assert np.all(xi_of_t(traj, s) == 0)


def test_eta_constant_potential_mode():
    traj, s = solve_ivp(lambda x: 3 + 0 * x, None, catalog.mode_x(1), None, basis(4), 1.0, 1e-3)
    np.testing.assert_allclose(eta_of_t(traj, s), 4.0, atol=1e-5)


def test_gronwall_bound_examples():
    t = np.linspace(0, 1, 11)
    assert gronwall_bound(2.0, np.zeros(11), t)[-1] == pytest.approx(2 * math.e)
    assert gronwall_bound(0.0, np.ones(11), t)[-1] == pytest.approx(math.e)
    t2 = np.linspace(0, 2, 201)
    assert gronwall_bound(1.0, t2, t2)[-1] == pytest.approx(math.e**2 * 3, rel=1e-12)


def test_gronwall_bound_rejects_negative_xi():
    with pytest.raises(InvalidArgumentError):
        gronwall_bound(1.0, np.array([0.0, -1.0]), np.array([0.0, 1.0]))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 10), st.lists(st.floats(0, 5), min_size=2, max_size=30))
def test_gronwall_bound_nondecreasing(eta0, xi):
    t = np.linspace(0, 1, len(xi))
    g = gronwall_bound(eta0, np.array(xi), t)
    assert np.all(np.diff(g) >= -1e-12 * np.abs(g[1:]))


def test_energy_estimate_free_mode(cos_mode):
    traj, s = cos_mode
    rep = verify_energy_estimate(traj, s)
    assert rep.passed
    assert rep.lhs == pytest.approx(2 + math.sqrt(PI), rel=1e-5)
    assert rep.rhs == pytest.approx(1.0, rel=1e-12)
    assert rep.ratio == pytest.approx(3.7725, abs=1e-4)
    assert rep.lhs_terms["sup_of_sum"] <= rep.lhs_terms["sum_of_sups"]


def test_energy_estimate_zero_data():
    traj, s = solve_ivp(None, None, None, None, basis(4), 1.0, 1e-2)
    rep = verify_energy_estimate(traj, s)
    assert rep.lhs == 0 and rep.rhs == 0 and rep.ratio == 0 and rep.passed


def test_m_norm_free_mode(cos_mode):
    traj, s = cos_mode
    assert m_norm(traj, s) == pytest.approx(math.sqrt(2 * PI), rel=1e-6)


def test_m_norm_zero():
    traj, s = solve_ivp(None, None, None, None, basis(4), 1.0, 1e-2)
    assert m_norm(traj, s) == 0.0


def test_m_norm_constant_potential_closed_form():
    traj, s = solve_ivp(lambda x: 1 + 0 * x, None, catalog.mode_x(2), None, basis(8), 1.0, 1e-3)
    w = math.sqrt(5.0)
    # |Lap u|^2 + |u_tt|^2 + |sqrt(V) u|^2 = (16 + 25 + 1) cos^2(w t)
    exact = math.sqrt(42 * (0.5 + math.sin(2 * w) / (4 * w)))
    assert m_norm(traj, s) == pytest.approx(exact, abs=1e-4)


def test_m_norm_is_a_norm():
    b = basis(10)
    V = catalog.sin_x(1.0, 0.5)
    ta, sa = solve_ivp(V, None, catalog.mode_x(1), catalog.mode_x(3, 0.2), b, 1.0, 1e-3)
    tb, _ = solve_ivp(V, None, catalog.bubble_x(), None, b, 1.0, 1e-3)
    tz, _ = solve_ivp(V, None, None, None, b, 1.0, 1e-3)
    na, nb = m_norm(ta, sa), m_norm(tb, sa)
    scaled = type(ta)(ta.times, -2.5 * ta.d, -2.5 * ta.dprime, -2.5 * ta.accel)
    assert m_norm(scaled, sa) == pytest.approx(2.5 * na, rel=1e-10)
    assert m_norm_difference(ta, tz, sa) == pytest.approx(na, rel=1e-12)
    neg_b = type(tb)(tb.times, -tb.d, -tb.dprime, -tb.accel)
    assert m_norm_difference(ta, neg_b, sa) <= (na + nb) * (1 + 1e-10)


def test_potential_term_vanishes_without_potential(cos_mode):
    traj, s = cos_mode
    assert s.potential_matrix is None
    assert np.all(s.potential_form(traj.d) == 0)


def test_corollary_free_mode(cos_mode):
    traj, s = cos_mode
    rep = corollary_bounds(traj, s)
    assert rep.ratios["dt_u_Linf_L2"] == pytest.approx(1.0, rel=1e-6)
    assert rep.lhs["dtt_u_L2_L2"] == pytest.approx(math.sqrt(PI), rel=1e-5)
    assert rep.brackets["dtt_u_L2_L2"] == pytest.approx(1.0, rel=1e-12)
    assert rep.ratios["dtt_u_L2_L2"] == pytest.approx(math.sqrt(PI), rel=1e-5)
    assert len(rep.ratios) == 7 and all(math.isfinite(r) for r in rep.ratios.values())
    assert rep.v_system_agreement <= 5e-3


class _PlainSource:
    def __init__(self, inner):
        self.inner = inner

    def __call__(self, t):
        return self.inner(t)


def test_corollary_without_source_derivative():
    b = basis(6)
    src = _PlainSource(NodalSource([catalog.sin_t()], [np.sin(b.nodes)]))
    traj, s = solve_ivp(None, src, None, None, b, 1.0, 1e-3)
    rep = corollary_bounds(traj, s)
    assert set(rep.skipped) == {"dtt_u_L2_L2", "lap_u_L2_L2"}
    assert "dtt_u_L2_L2" not in rep.ratios
    with pytest.raises(UnsupportedCheckError):
        corollary_bounds(traj, s, require_differentiated=True)
    full = corollary_bounds(traj, s, source_derivative=src.inner.derivative())
    assert full.v_system_agreement <= 5e-3
