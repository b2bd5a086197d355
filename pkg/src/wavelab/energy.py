"""Energy functionals and numerical checks of the a-priori estimates."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import InvalidArgumentError, UnsupportedCheckError
from .galerkin import NodalSource, integrate
from .spectral_core import h20_norm, norm


def _trapz(values, times):
    if len(times) < 2:
        return 0.0
    return float(np.trapezoid(values, times))


def _quad_form(d, G):
    if G is None:
        return np.zeros(d.shape[0])
    return np.sum((d @ G) * d, axis=-1)


def eta_of_t(traj, system):
    """eta(t) = ||u_t||^2 + ||u||^2_{H10} + ||sqrt(V) u||^2 at each sample."""
    if traj.d.shape[1] != system.m:
        raise InvalidArgumentError("trajectory and system use different bases")
    return (np.sum(traj.dprime**2, axis=1)
            + np.sum(system.stiffness * traj.d**2, axis=1)
            + _quad_form(traj.d, system.potential_matrix))


def xi_of_t(traj, system):
    """xi(t) = ||f(t)||^2_{L2} at each sample."""
    return np.array([system.source_sq_norm(t) for t in traj.times])


def gronwall_bound(eta0, xi, times):
    """e^t (eta(0) + int_0^t xi), with the integral by the trapezoid rule."""
    xi = np.asarray(xi, dtype=float)
    times = np.asarray(times, dtype=float)
    if xi.shape != times.shape:
        raise InvalidArgumentError("xi and times must have the same shape")
    if np.any(xi < 0):
        raise InvalidArgumentError(f"xi must be nonnegative, min is {xi.min():.3e}")
    integral = cumulative_trapezoid(xi, times, initial=0.0) if times.size > 1 else np.zeros_like(xi)
    return np.exp(times) * (eta0 + integral)


@dataclass(frozen=True)
class EnergyReport:
    times: np.ndarray
    eta_values: np.ndarray
    xi_values: np.ndarray
    gronwall_bound_values: np.ndarray
    lhs: float
    rhs: float
    ratio: float
    lhs_terms: dict
    rhs_terms: dict
    max_gronwall_excess: float
    passed: bool


def _safe_ratio(lhs, rhs):
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


def _data_norms(traj, system):
    basis = system.basis
    d0, d1 = traj.d[0], traj.dprime[0]
    xi = xi_of_t(traj, system)
    return {
        "f_L2L2": math.sqrt(_trapz(xi, traj.times)),
        "V_inf": system.v_max,
        "u0_L2": norm("L2", d0, basis),
        "u0_H10": norm("H10", d0, basis),
        "u0_H20": h20_norm(d0, basis),
        "u1_L2": norm("L2", d1, basis),
        "u1_H10": norm("H10", d1, basis),
    }, xi


def verify_energy_estimate(traj, system, rtol=1e-6, atol=1e-12):
    """Check eta against its Gronwall bound and report the energy-estimate ratio.

    The left side takes the sup over samples of each of ||u_t||, ||u||_{H10}
    and ||sqrt(V) u|| separately, plus ||u_tt||_{L2(0,T;H^-1)}; it bounds the
    sup of their sum (also reported) from above. The right side is the data bracket
    ||f|| + (|V|^(1/2) + |V|)||u0|| + ||u0||_{H10} + ||u1||.
    """
    eta = eta_of_t(traj, system)
    data, xi = _data_norms(traj, system)
    bound = gronwall_bound(eta[0], xi, traj.times)

    speed = np.sqrt(np.sum(traj.dprime**2, axis=1))
    grad = np.sqrt(np.sum(system.stiffness * traj.d**2, axis=1))
    weighted = np.sqrt(np.maximum(_quad_form(traj.d, system.potential_matrix), 0.0))
    dtt_hm1 = math.sqrt(_trapz(np.sum(traj.accel**2 / system.stiffness, axis=1), traj.times))
    sup_sum = float(np.max(speed + grad + weighted))
    sum_sups = float(speed.max() + grad.max() + weighted.max())
    lhs = sum_sups + dtt_hm1

    vinf = data["V_inf"]
    rhs = data["f_L2L2"] + (math.sqrt(vinf) + vinf) * data["u0_L2"] + data["u0_H10"] + data["u1_L2"]

    excess = eta - (bound * (1 + rtol) + atol)
    ratio = _safe_ratio(lhs, rhs)
    return EnergyReport(
        times=traj.times,
        eta_values=eta,
        xi_values=xi,
        gronwall_bound_values=bound,
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        lhs_terms={
            "sup_of_sum": sup_sum,
            "sum_of_sups": sum_sups,
            "dtt_u_L2_Hminus1": dtt_hm1,
        },
        rhs_terms=data,
        max_gronwall_excess=float(np.max(excess)),
        passed=bool(np.all(excess <= 0) and math.isfinite(ratio)),
    )


def m_norm_parts(times, d, dtt, lambdas, G=None):
    """Squared pieces of the space-time norm (||Lap u||^2 + ||u_tt||^2 + ||sqrt(V) u||^2)^(1/2)."""
    lap = np.sum((lambdas * d) ** 2, axis=1)
    acc = np.sum(dtt**2, axis=1)
    pot = _quad_form(d, G)
    return {
        "lap_sq": _trapz(lap, times),
        "dtt_sq": _trapz(acc, times),
        "pot_sq": _trapz(pot, times),
    }


def m_norm(traj, system):
    parts = m_norm_parts(traj.times, traj.d, traj.accel, system.stiffness, system.potential_matrix)
    return math.sqrt(sum(parts.values()))


def m_norm_difference(traj_a, traj_b, system_a):
    """Norm of u_a - u_b, with u_tt from each system and V taken from ``system_a``."""
    if traj_a.d.shape != traj_b.d.shape or not np.array_equal(traj_a.times, traj_b.times):
        raise InvalidArgumentError("trajectories must share their sample grid and basis")
    parts = m_norm_parts(traj_a.times, traj_a.d - traj_b.d, traj_a.accel - traj_b.accel,
                         system_a.stiffness, system_a.potential_matrix)
    return math.sqrt(sum(parts.values()))


@dataclass(frozen=True)
class CorollaryReport:
    lhs: dict
    brackets: dict
    ratios: dict
    skipped: dict
    v_system_agreement: float | None
    v_system_derivative_agreement: float | None


def _source_derivative(system, source_derivative):
    if source_derivative is not None:
        return source_derivative, True
    if system.source is None:
        return None, True
    if isinstance(system.source, NodalSource):
        return system.source.derivative(), True
    return None, False


def corollary_bounds(traj, system, source_derivative=None, require_differentiated=False):
    """Evaluate the seven solution-norm bounds and their data brackets.

    The two bounds on u_tt and Lap u in L2(0,T;L2) go through the
    differentiated problem v = u_t, solved as a second Galerkin system with
    v(0) = u1 and v_t(0) = Lap u0 - V u0 + f(0) and source f_t.
    """
    basis = system.basis
    times = traj.times
    data, _ = _data_norms(traj, system)
    vinf = data["V_inf"]
    sv, v = math.sqrt(vinf), vinf

    speed = np.sqrt(np.sum(traj.dprime**2, axis=1))
    grad_sq = np.sum(system.stiffness * traj.d**2, axis=1)
    weighted = np.sqrt(np.maximum(_quad_form(traj.d, system.potential_matrix), 0.0))

    lhs = {
        "dt_u_Linf_L2": float(speed.max()),
        "u_Linf_H10": float(np.sqrt(grad_sq.max())),
        "sqrtV_u_Linf_L2": float(weighted.max()),
        "dtt_u_L2_Hminus1": math.sqrt(_trapz(np.sum(traj.accel**2 / system.stiffness, axis=1), times)),
        # ||Lap u||_{H^-1} = ||u||_{H10} in the eigenbasis
        "lap_u_L2_Hminus1": math.sqrt(_trapz(grad_sq, times)),
        "lap_u_L2_L2": math.sqrt(_trapz(np.sum((system.stiffness * traj.d) ** 2, axis=1), times)),
    }
    energy = data["f_L2L2"] + sv * data["u0_L2"] + data["u0_H10"] + data["u1_L2"]
    brackets = {
        "dt_u_Linf_L2": energy,
        "u_Linf_H10": energy,
        "sqrtV_u_Linf_L2": energy,
        "dtt_u_L2_Hminus1": data["f_L2L2"] + v * data["u0_L2"] + data["u0_H10"] + data["u1_L2"],
        "lap_u_L2_Hminus1": (1 + sv) * (data["f_L2L2"] + data["u0_H10"] + data["u1_L2"]) + v * data["u0_L2"],
    }

    skipped = {}
    agreement = deriv_agreement = None
    ft, available = _source_derivative(system, source_derivative)
    if not available:
        if require_differentiated:
            raise UnsupportedCheckError("source has no time-derivative provider")
        skipped = {"dtt_u_L2_L2": "no f_t provider", "lap_u_L2_L2": "no f_t provider"}
        lhs.pop("lap_u_L2_L2")
    else:
        vsys = dataclasses.replace(system, source=ft, extra_load=None, _load_cache={})
        vtraj = integrate(vsys, traj.dprime[0], traj.accel[0], float(times[-1]), traj.dt)
        lhs["dtt_u_L2_L2"] = math.sqrt(_trapz(np.sum(vtraj.dprime**2, axis=1), times))
        if ft is None:
            ft_norm_sq = np.zeros_like(times)
        else:
            ft_norm_sq = np.array([np.sum(basis.weights * ft(t) ** 2) for t in times])
        f_h1 = math.sqrt(data["f_L2L2"] ** 2 + _trapz(ft_norm_sq, times))
        brackets["dtt_u_L2_L2"] = f_h1 + (1 + sv) * data["u1_H10"] + (1 + v) * data["u0_H20"]
        brackets["lap_u_L2_L2"] = ((1 + sv) * (f_h1 + data["u0_H10"] + data["u1_H10"])
                                   + (1 + v) * data["u0_H20"])
        ut_numeric = np.gradient(traj.d, times, axis=0, edge_order=2)
        agreement = math.sqrt(_trapz(np.sum((vtraj.d - ut_numeric) ** 2, axis=1), times))
        utt_numeric = np.gradient(traj.dprime, times, axis=0, edge_order=2)
        deriv_agreement = math.sqrt(_trapz(np.sum((vtraj.dprime - utt_numeric) ** 2, axis=1), times))

    ratios = {key: _safe_ratio(lhs[key], brackets[key]) for key in lhs}
    return CorollaryReport(lhs, brackets, ratios, skipped, agreement, deriv_agreement)
