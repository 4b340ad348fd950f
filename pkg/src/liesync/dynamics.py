"""The extremum-seeking vector field, its gradient reference, and group integrators.

Fields are left-trivialized: a FieldSample holds per-agent algebra coordinates
u^j with the state evolving as g_j' = g_j * hat(u^j).  The extremum-seeking
coefficients for agent j are

    u_i^j(t) = -gain * a_i^j sin(omega_i^j t) * J(perturbed configuration),

where the perturbed configuration applies every agent's own geodesic dither
simultaneously and J is evaluated once per time sample — the agents are blind
and share only that scalar.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cost import (Configuration, NetworkConfig, cost as network_cost,
                   cost_states)
from .dither import DitherSchedule, common_period, dither_matrix
from .groups import AlgebraVector, GroupTag, exp_many

AVERAGING_TOL = 1e-10
MAX_QUADRATURE_INTERVALS = 1 << 17


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Per-agent left-trivialized velocities at one time: coeffs is (m, n)."""

    tag: GroupTag
    t: float
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 2 or coeffs.shape[1] != self.tag.algebra_dim:
            raise ValueError(
                f"coeffs must be (m, {self.tag.algebra_dim}) for {self.tag.value}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def vector(self, agent: int) -> AlgebraVector:
        return AlgebraVector(self.tag, self.coeffs[agent])


def _es_coefficients(schedule: DitherSchedule, t: float, cost_value: float,
                     gain: float) -> np.ndarray:
    # deliberately takes the measured scalar, not the states
    return -gain * schedule.amplitudes * np.sin(schedule.omegas * t) * cost_value


def es_field(net: NetworkConfig, cfg: Configuration, schedule: DitherSchedule,
             t: float, gain: float = 1.0,
             cost_fn: Callable[[NetworkConfig, Configuration], float] | None = None,
             ) -> FieldSample:
    """Extremum-seeking field at time t for a frozen configuration.

    Exactly one cost evaluation is made; `cost_fn` may be injected for
    instrumentation and defaults to the group's synchronization cost.
    """
    if schedule.m != cfg.m or schedule.n != cfg.tag.algebra_dim:
        raise ValueError("schedule dimensions do not match the configuration")
    D = dither_matrix(schedule, t)
    perturbed = Configuration.from_array(
        cfg.tag, cfg.as_array() @ exp_many(D, cfg.tag))
    measured = (cost_fn or network_cost)(net, perturbed)
    return FieldSample(cfg.tag, t, _es_coefficients(schedule, t, measured, gain))


def es_coeffs_states(states: np.ndarray, edges: np.ndarray, tag: GroupTag,
                     amplitudes: np.ndarray, omegas: np.ndarray, t: float,
                     gain: float = 1.0) -> np.ndarray:
    """Array-level twin of es_field used by the integration engines."""
    D = amplitudes * np.sin(omegas * t)
    perturbed = states @ exp_many(D, tag)
    J = cost_states(perturbed, edges, tag)
    return -gain * amplitudes * np.sin(omegas * t) * J


def gradient_coeffs_states(states: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Left-trivialized descent direction of the SO(3) cost, per agent.

    hat(u^i) = 0.5 * sum over neighbors j of (x_i^T x_j - x_j^T x_i).
    """
    m = states.shape[0]
    U = np.zeros((m, 3))
    for i, j in edges:
        M = states[i].T @ states[j]
        W = 0.5 * (M - M.T)
        w = np.array([W[0, 1], W[1, 2], W[0, 2]])
        U[i] += w
        U[j] -= w  # x_j^T x_i = M^T, whose skew part is -W
    return U


def gradient_field_so3(net: NetworkConfig, cfg: Configuration) -> FieldSample:
    """Negative-gradient reference field of the SO(3) cost (autonomous)."""
    if cfg.tag is not GroupTag.SO3 or net.tag is not GroupTag.SO3:
        raise ValueError("gradient_field_so3 expects SO3 network and configuration")
    return FieldSample(
        GroupTag.SO3, 0.0,
        gradient_coeffs_states(cfg.as_array(), net.edge_array()))


def directional_derivatives(net: NetworkConfig, cfg: Configuration,
                            eps: float = 1e-5) -> np.ndarray:
    """Central-difference derivatives of J along each agent's basis directions.

    Entry (j, i) is d/ds J(..., g_j * exp(s * E_i), ...) at s = 0.  Used as the
    reference in averaging diagnostics.
    """
    states = cfg.as_array()
    edges = net.edge_array()
    tag = cfg.tag
    n = tag.algebra_dim
    out = np.zeros((cfg.m, n))
    for a in range(cfg.m):
        for k in range(n):
            v = np.zeros((1, n))
            v[0, k] = eps
            Ep = exp_many(v, tag)[0]
            v[0, k] = -eps
            Em = exp_many(v, tag)[0]
            sp = states.copy()
            sp[a] = sp[a] @ Ep
            sm = states.copy()
            sm[a] = sm[a] @ Em
            out[a, k] = (cost_states(sp, edges, tag)
                         - cost_states(sm, edges, tag)) / (2.0 * eps)
    return out


def averaged_field(net: NetworkConfig, cfg: Configuration, schedule: DitherSchedule,
                   gain: float = 1.0, tol: float = AVERAGING_TOL) -> FieldSample:
    """Time average of the extremum-seeking field over one common dither period.

    Composite Simpson quadrature; the interval count doubles until the result
    moves by less than `tol` in the sup norm.  The integrand is smooth and
    periodic, so convergence is fast.
    """
    if schedule.m != cfg.m or schedule.n != cfg.tag.algebra_dim:
        raise ValueError("schedule dimensions do not match the configuration")
    states = cfg.as_array()
    edges = net.edge_array()
    T = common_period(schedule)
    amp, omg = schedule.amplitudes, schedule.omegas

    def average(intervals: int) -> np.ndarray:
        ts = np.linspace(0.0, T, intervals + 1)
        vals = np.array([
            es_coeffs_states(states, edges, cfg.tag, amp, omg, t, gain) for t in ts])
        w = np.ones(intervals + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return np.tensordot(w, vals, axes=(0, 0)) / (3.0 * intervals)

    intervals = 64
    prev = average(intervals)
    while True:
        intervals *= 2
        cur = average(intervals)
        if np.max(np.abs(cur - prev)) < tol:
            return FieldSample(cfg.tag, 0.0, cur)
        if intervals >= MAX_QUADRATURE_INTERVALS:
            raise RuntimeError(
                f"quadrature did not stabilize to {tol:g} within "
                f"{MAX_QUADRATURE_INTERVALS} intervals")
        prev = cur


def advance_states(states: np.ndarray, coeffs: np.ndarray, h: float,
                   tag: GroupTag) -> np.ndarray:
    """One exponential update g_j <- g_j * exp(hat(h * u^j)) on stacked states."""
    return states @ exp_many(h * coeffs, tag)


def lie_euler_step(cfg: Configuration, sample: FieldSample, h: float) -> Configuration:
    """Group-preserving Euler update; exact for constant left-invariant fields."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    if sample.tag is not cfg.tag or sample.coeffs.shape[0] != cfg.m:
        raise ValueError("field sample does not match the configuration")
    return Configuration.from_array(
        cfg.tag, advance_states(cfg.as_array(), sample.coeffs, h, cfg.tag))


def rk_mk2_step(cfg: Configuration,
                field: Callable[[Configuration, float], FieldSample],
                t: float, h: float) -> Configuration:
    """Second-order Munthe-Kaas midpoint step.

    k1 at (cfg, t); k2 at the half-step point advanced by exp(h/2 * k1); the
    full update uses k2.  Coincides with lie_euler_step for constant fields.
    """
    if h <= 0.0:
        raise ValueError("step size must be positive")
    k1 = field(cfg, t)
    mid = lie_euler_step(cfg, k1, 0.5 * h)
    k2 = field(mid, t + 0.5 * h)
    return lie_euler_step(cfg, k2, h)
