import math

import numpy as np
import pytest

from wavelab import catalog
from wavelab.errors import InvalidArgumentError, NonnegativityError, StepSizeError
from wavelab.fd_oracle import FdGrid, compare, fd_solve
from wavelab.galerkin import NodalSource, accel, assemble_system, integrate, solve_ivp, step_count
from wavelab.singular import Mollifier, dirac, refine_for, regularize
from wavelab.spectral_core import EigenBasis, Interval, eigenfunctions, norm

PI = math.pi


def basis(m, length=PI):
    return EigenBasis(Interval(length), m)


def test_constant_potential_matrix_is_scaled_identity():
    b = basis(10)
    s = assemble_system(lambda x: 2.5 + 0 * x, None, b)
    np.testing.assert_allclose(s.potential_matrix, 2.5 * np.eye(10), atol=1e-10)


def test_potential_matrix_symmetric_and_psd():
    b = basis(24)
    s = assemble_system(catalog.sin_x(1.0, 1.0, 3.0, 0.4), None, b)
    G = s.potential_matrix
    assert np.max(np.abs(G - G.T)) <= 1e-12
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = rng.normal(size=24)
        assert x @ G @ x >= -1e-10 * (x @ x)


def test_mollified_delta_matrix_entry_tends_to_sifted_value():
    errs = []
    for eps in (2.0**-3, 2.0**-5, 2.0**-7):
        iv = refine_for(Interval(PI), dirac(PI / 2), eps)
        b = EigenBasis(iv, 4)
        V = regularize(dirac(PI / 2), Mollifier(), eps, b)
        errs.append(abs(assemble_system(V, None, b).potential_matrix[0, 0] - 2 / PI))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_negative_potential_rejected():
    with pytest.raises(NonnegativityError):
        assemble_system(lambda x: np.sin(2 * x), None, basis(4))


def test_load_of_single_mode_source():
    b = basis(5)
    src = NodalSource([catalog.sin_t()], [eigenfunctions(PI, 1, b.nodes)[0]])
    s = assemble_system(None, src, b)
    for t in (0.3, 1.7):
        np.testing.assert_allclose(s.load(t), [math.sin(t), 0, 0, 0, 0], atol=1e-10)


def test_cached_load_matches_quadrature_every_call():
    b = basis(12)
    src = NodalSource([catalog.sin_t(1, 2), catalog.cos_t(0.5)], [b.nodes * (PI - b.nodes), np.cos(b.nodes)])
    plain = assemble_system(None, src, b)
    cached = assemble_system(None, src, b, cache_load=True)
    for t in (0.0, 0.4, 2.0):
        np.testing.assert_allclose(cached.load(t), plain.load(t), atol=1e-13)


def test_accel_examples():
    b = basis(2)
    s0 = assemble_system(None, None, b)
    np.testing.assert_allclose(accel(s0, np.array([1.0, 0.0]), 0.0), [-1, 0])
    s3 = assemble_system(lambda x: 3 + 0 * x, None, b)
    np.testing.assert_allclose(accel(s3, np.array([1.0, 0.0]), 0.0), [-4, 0], atol=1e-12)
    src = NodalSource([catalog.const_t(1.0)], [eigenfunctions(PI, 1, b.nodes)[0]])
    s1 = assemble_system(None, src, b)
    np.testing.assert_allclose(accel(s1, np.zeros(2), 0.5), [1, 0], atol=1e-12)


def test_free_mode_is_cosine():
    b = basis(8)
    s = assemble_system(None, None, b)
    traj = integrate(s, np.eye(8)[0], np.zeros(8), PI / 2, 1e-3)
    assert traj.d[0, 0] == 1.0
    assert abs(traj.d[-1, 0]) <= 3e-6
    assert traj.times[-1] == PI / 2


def test_zero_data_gives_zero_trajectory():
    b = basis(8)
    s = assemble_system(lambda x: 1 + np.sin(x), None, b)
    traj = integrate(s, np.zeros(8), np.zeros(8), 1.0, 1e-2)
    assert np.all(traj.d == 0) and np.all(traj.dprime == 0)


def test_constant_potential_mode_second_order():
    b = basis(4)
    s = assemble_system(lambda x: 3 + 0 * x, None, b)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        traj = integrate(s, np.eye(4)[0], np.zeros(4), 1.0, dt)
        errs.append(np.max(np.abs(traj.d[:, 0] - np.cos(2 * traj.times))))
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5
    assert errs[-1] <= 1e-6


def test_step_size_guard_reports_suggestion():
    b = basis(64)
    s = assemble_system(None, None, b)
    with pytest.raises(StepSizeError) as info:
        integrate(s, np.zeros(64), np.zeros(64), 1.0, 0.1)
    assert info.value.suggested_dt == pytest.approx(0.5 / 64)


def test_step_count_validation():
    assert step_count(1.0, 0.3) == 4
    with pytest.raises(InvalidArgumentError):
        step_count(0.0, 0.1)


def test_solve_ivp_modes():
    b = basis(8)
    w1 = catalog.mode_x(1)
    traj, _ = solve_ivp(None, None, w1, None, b, 2.0, 1e-3)
    assert np.max(np.abs(traj.d[:, 0] - np.cos(traj.times))) <= 1e-6
    traj, _ = solve_ivp(None, None, None, w1, b, 2.0, 1e-3)
    assert np.max(np.abs(traj.d[:, 0] - np.sin(traj.times))) <= 1e-6


def _parabola_vs_fd(m):
    b = basis(m)
    u0 = catalog.bubble_x()
    V = catalog.const_x(1.0)
    traj, _ = solve_ivp(V, None, u0, None, b, 1.0, 2.5e-4)
    fd = fd_solve(FdGrid.create(PI, 1600, 2.5e-4, V, u0), T=1.0)
    return compare(traj, b, fd, [1.0])


def test_parabola_with_unit_potential_against_fd():
    # the m = 32 truncation alone leaves about 1.7e-4 of the datum in L2
    assert _parabola_vs_fd(32) <= 2e-4
    assert _parabola_vs_fd(64) <= 1e-4


def test_energy_conservation_unforced():
    b = basis(16)
    V = catalog.sin_x(2.0, 1.5, 2.0)
    u0 = catalog.sum_x(catalog.mode_x(1, 1.0), catalog.mode_x(3, 0.3))
    dt = 5e-3
    traj, s = solve_ivp(V, None, u0, catalog.mode_x(2, 0.5), b, 3.0, dt)
    E = 0.5 * (np.sum(traj.dprime**2, 1) + np.sum(s.stiffness * traj.d**2, 1) + s.potential_form(traj.d))
    assert np.max(np.abs(E - E[0])) <= 10 * dt**2 * (1 + E[0])


def test_superposition():
    b = basis(12)
    V = catalog.sin_x(1.0, 0.5)
    ua, ub = catalog.mode_x(1), catalog.bubble_x()
    ta, _ = solve_ivp(V, None, ua, None, b, 1.0, 1e-3)
    tb, _ = solve_ivp(V, None, ub, None, b, 1.0, 1e-3)
    tc, _ = solve_ivp(V, None, lambda x: 2 * ua(x) - 3 * ub(x), None, b, 1.0, 1e-3)
    ref = 2 * ta.d - 3 * tb.d
    assert np.max(np.abs(tc.d - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_convergence_in_mode_count_against_fd():
    u0 = catalog.bubble_x()
    V = catalog.sin_x(1.0, 1.0)
    fd = fd_solve(FdGrid.create(PI, 1600, 5e-4, V, u0), T=1.0)
    errs = []
    for m in (8, 16, 32):
        traj, _ = solve_ivp(V, None, u0, None, basis(m), 1.0, 5e-4)
        errs.append(compare(traj, basis(m), fd, [1.0]))
    assert errs[0] > errs[1] > errs[2]


def test_trajectory_index_lookup():
    b = basis(2)
    traj = integrate(assemble_system(None, None, b), np.zeros(2), np.zeros(2), 1.0, 0.25)
    assert traj.index_of(0.5) == 2
    with pytest.raises(InvalidArgumentError):
        traj.index_of(0.3)


def test_projection_through_weighted_norm():
    b = basis(6)
    traj, s = solve_ivp(lambda x: 4 + 0 * x, None, catalog.mode_x(1), None, b, 0.1, 1e-3)
    assert norm("weightedL2", traj.d[0], b, V=s.V_nodes) == pytest.approx(2.0, rel=1e-10)
