"""JIT-compiled integration loops.

These duplicate the stepping logic of the pure-numpy engine in experiment.py
one-for-one (same update order, same record cadence); the engines are
cross-checked in the test suite.  Everything here works on raw float64 arrays.

Mode flags: 0 = extremum seeking, 1 = gradient flow (SO(3) only).
Integrator flags: 0 = Lie-Euler, 1 = midpoint (two field evaluations).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _exp_so3_into(out, v0, v1, v2):
    # out <- exp of the algebra matrix with coordinates (v0, v1, v2)
    th2 = v0 * v0 + v1 * v1 + v2 * v2
    th = np.sqrt(th2)
    if th < 1e-8:
        c1 = 1.0 - th2 / 6.0
        c2 = 0.5 - th2 / 24.0
    else:
        c1 = np.sin(th) / th
        c2 = (1.0 - np.cos(th)) / th2
    # S = [[0, v0, v2], [-v0, 0, v1], [-v2, -v1, 0]], S2 = S @ S
    s2_00 = -(v0 * v0 + v2 * v2)
    s2_01 = -v2 * v1
    s2_02 = v0 * v1
    s2_11 = -(v0 * v0 + v1 * v1)
    s2_12 = -v0 * v2
    s2_22 = -(v1 * v1 + v2 * v2)
    out[0, 0] = 1.0 + c2 * s2_00
    out[0, 1] = c1 * v0 + c2 * s2_01
    out[0, 2] = c1 * v2 + c2 * s2_02
    out[1, 0] = -c1 * v0 + c2 * s2_01
    out[1, 1] = 1.0 + c2 * s2_11
    out[1, 2] = c1 * v1 + c2 * s2_12
    out[2, 0] = -c1 * v2 + c2 * s2_02
    out[2, 1] = -c1 * v1 + c2 * s2_12
    out[2, 2] = 1.0 + c2 * s2_22


@njit(cache=True)
def _exp_se3_into(out, v0, v1, v2, p0, p1, p2):
    _exp_so3_into(out[:3, :3], v0, v1, v2)
    th2 = v0 * v0 + v1 * v1 + v2 * v2
    th = np.sqrt(th2)
    if th < 1e-4:
        a1 = 0.5
        a2 = 1.0 / 6.0
    else:
        a1 = (1.0 - np.cos(th)) / th2
        a2 = (th - np.sin(th)) / (th2 * th)
    s2_00 = -(v0 * v0 + v2 * v2)
    s2_01 = -v2 * v1
    s2_02 = v0 * v1
    s2_11 = -(v0 * v0 + v1 * v1)
    s2_12 = -v0 * v2
    s2_22 = -(v1 * v1 + v2 * v2)
    # A = I + a1*S + a2*S2, translation column = A @ p
    out[0, 3] = (1.0 + a2 * s2_00) * p0 + (a1 * v0 + a2 * s2_01) * p1 + (a1 * v2 + a2 * s2_02) * p2
    out[1, 3] = (-a1 * v0 + a2 * s2_01) * p0 + (1.0 + a2 * s2_11) * p1 + (a1 * v1 + a2 * s2_12) * p2
    out[2, 3] = (-a1 * v2 + a2 * s2_02) * p0 + (-a1 * v1 + a2 * s2_12) * p1 + (1.0 + a2 * s2_22) * p2
    out[3, 0] = 0.0
    out[3, 1] = 0.0
    out[3, 2] = 0.0
    out[3, 3] = 1.0


@njit(cache=True)
def _cost(states, edges, d):
    # d = 3: SO(3) cost; d = 4: SE(3) cost (rotation block + translation term)
    J = 0.0
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        s = 0.0
        for r in range(3):
            for c in range(3):
                s += states[i, r, c] * states[j, r, c]
        J += 3.0 - s
        if d == 4:
            acc = 0.0
            for r in range(3):
                diff = states[i, r, 3] - states[j, r, 3]
                acc += diff * diff
            J += 0.5 * acc
    return J


@njit(cache=True)
def _es_coeffs(states, edges, amp, wmult, t, gain, d, pert, coeffs):
    m, n = amp.shape
    for a in range(m):
        if d == 3:
            _exp_so3_into(pert[a],
                          amp[a, 0] * np.sin(wmult[a, 0] * t),
                          amp[a, 1] * np.sin(wmult[a, 1] * t),
                          amp[a, 2] * np.sin(wmult[a, 2] * t))
        else:
            _exp_se3_into(pert[a],
                          amp[a, 0] * np.sin(wmult[a, 0] * t),
                          amp[a, 1] * np.sin(wmult[a, 1] * t),
                          amp[a, 2] * np.sin(wmult[a, 2] * t),
                          amp[a, 3] * np.sin(wmult[a, 3] * t),
                          amp[a, 4] * np.sin(wmult[a, 4] * t),
                          amp[a, 5] * np.sin(wmult[a, 5] * t))
        pert[a] = states[a] @ pert[a]
    J = _cost(pert, edges, d)
    for a in range(m):
        for i in range(n):
            coeffs[a, i] = -gain * amp[a, i] * np.sin(wmult[a, i] * t) * J


@njit(cache=True)
def _gradient_coeffs(states, edges, coeffs):
    coeffs[:] = 0.0
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        # skew part of x_i^T x_j in basis coordinates
        m01 = 0.0
        m10 = 0.0
        m12 = 0.0
        m21 = 0.0
        m02 = 0.0
        m20 = 0.0
        for r in range(3):
            m01 += states[i, r, 0] * states[j, r, 1]
            m10 += states[i, r, 1] * states[j, r, 0]
            m12 += states[i, r, 1] * states[j, r, 2]
            m21 += states[i, r, 2] * states[j, r, 1]
            m02 += states[i, r, 0] * states[j, r, 2]
            m20 += states[i, r, 2] * states[j, r, 0]
        w0 = 0.5 * (m01 - m10)
        w1 = 0.5 * (m12 - m21)
        w2 = 0.5 * (m02 - m20)
        coeffs[i, 0] += w0
        coeffs[i, 1] += w1
        coeffs[i, 2] += w2
        coeffs[j, 0] -= w0
        coeffs[j, 1] -= w1
        coeffs[j, 2] -= w2


@njit(cache=True)
def _advance(states, coeffs, h, d, scratch):
    m = states.shape[0]
    for a in range(m):
        if d == 3:
            _exp_so3_into(scratch, h * coeffs[a, 0], h * coeffs[a, 1], h * coeffs[a, 2])
        else:
            _exp_se3_into(scratch, h * coeffs[a, 0], h * coeffs[a, 1], h * coeffs[a, 2],
                          h * coeffs[a, 3], h * coeffs[a, 4], h * coeffs[a, 5])
        states[a] = states[a] @ scratch


@njit(cache=True)
def _dispersion(states):
    m = states.shape[0]
    worst = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            acc = 0.0
            for r in range(states.shape[1]):
                for c in range(states.shape[2]):
                    diff = states[i, r, c] - states[j, r, c]
                    acc += diff * diff
            dist = np.sqrt(acc)
            if dist > worst:
                worst = dist
    return worst


@njit(cache=True)
def _max_drift(states):
    # max over agents of ||R^T R - I||_F for the rotation blocks
    m = states.shape[0]
    worst = 0.0
    for a in range(m):
        acc = 0.0
        for r in range(3):
            for c in range(3):
                s = 0.0
                for k in range(3):
                    s += states[a, k, r] * states[a, k, c]
                if r == c:
                    s -= 1.0
                acc += s * s
        err = np.sqrt(acc)
        if err > worst:
            worst = err
    return worst


@njit(cache=True)
def run_loop(states, edges, amp, wmult, gain, dt, nsteps, record_every,
             mode, integrator, rec_times, rec_costs, rec_disp, rec_drift,
             rec_states):
    """Integrate in place and fill the record arrays; returns the sample count."""
    m = states.shape[0]
    d = states.shape[1]
    n = amp.shape[1]
    pert = np.zeros((m, d, d))
    coeffs = np.zeros((m, n))
    coeffs2 = np.zeros((m, n))
    mid = np.zeros((m, d, d))
    scratch = np.zeros((d, d))

    rec_times[0] = 0.0
    rec_costs[0] = _cost(states, edges, d)
    rec_disp[0] = _dispersion(states)
    rec_drift[0] = _max_drift(states)
    rec_states[0] = states
    r = 1

    for k in range(nsteps):
        t = k * dt
        if integrator == 0:
            if mode == 0:
                _es_coeffs(states, edges, amp, wmult, t, gain, d, pert, coeffs)
            else:
                _gradient_coeffs(states, edges, coeffs)
            _advance(states, coeffs, dt, d, scratch)
        else:
            if mode == 0:
                _es_coeffs(states, edges, amp, wmult, t, gain, d, pert, coeffs)
            else:
                _gradient_coeffs(states, edges, coeffs)
            mid[:] = states
            _advance(mid, coeffs, 0.5 * dt, d, scratch)
            if mode == 0:
                _es_coeffs(mid, edges, amp, wmult, t + 0.5 * dt, gain, d, pert, coeffs2)
            else:
                _gradient_coeffs(mid, edges, coeffs2)
            _advance(states, coeffs2, dt, d, scratch)
        if (k + 1) % record_every == 0 or (k + 1) == nsteps:
            rec_times[r] = (k + 1) * dt
            rec_costs[r] = _cost(states, edges, d)
            rec_disp[r] = _dispersion(states)
            rec_drift[r] = _max_drift(states)
            rec_states[r] = states
            r += 1
    return r
