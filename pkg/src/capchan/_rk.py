"""Compiled adaptive Runge-Kutta core for the profile system.

The right-hand side is the arclength system

    x' = cos(theta),  z' = sin(theta),  theta' = kappa * z,

integrated with a Fehlberg 7(8) pair (13 stages, 8th-order propagation,
embedded 7th-order error estimate).  The step controller targets a fixed
fraction of the requested tolerance so that conserved quantities hold well
below the user-facing tolerance even over long winding trajectories.

Dense evaluation between accepted nodes re-takes a single Runge-Kutta
sub-step from the preceding node; its local error is bounded by the accepted
step's, so interpolation never degrades the solution order.
"""

import numpy as np
from numba import njit

# Fehlberg 7(8) tableau.
_C = np.array([0.0, 2 / 27, 1 / 9, 1 / 6, 5 / 12, 1 / 2, 5 / 6, 1 / 6,
               2 / 3, 1 / 3, 1.0, 0.0, 1.0])
_A = np.zeros((13, 13))
_A[1, 0] = 2 / 27
_A[2, :2] = (1 / 36, 1 / 12)
_A[3, :3] = (1 / 24, 0, 1 / 8)
_A[4, :4] = (5 / 12, 0, -25 / 16, 25 / 16)
_A[5, :5] = (1 / 20, 0, 0, 1 / 4, 1 / 5)
_A[6, :6] = (-25 / 108, 0, 0, 125 / 108, -65 / 27, 125 / 54)
_A[7, :7] = (31 / 300, 0, 0, 0, 61 / 225, -2 / 9, 13 / 900)
_A[8, :8] = (2, 0, 0, -53 / 6, 704 / 45, -107 / 9, 67 / 90, 3)
_A[9, :9] = (-91 / 108, 0, 0, 23 / 108, -976 / 135, 311 / 54, -19 / 60,
             17 / 6, -1 / 12)
_A[10, :10] = (2383 / 4100, 0, 0, -341 / 164, 4496 / 1025, -301 / 82,
               2133 / 4100, 45 / 82, 45 / 164, 18 / 41)
_A[11, :11] = (3 / 205, 0, 0, 0, 0, -6 / 41, -3 / 205, -3 / 41, 3 / 41,
               6 / 41, 0)
_A[12, :12] = (-1777 / 4100, 0, 0, -341 / 164, 4496 / 1025, -289 / 82,
               2193 / 4100, 51 / 82, 33 / 164, 12 / 41, 0, 1)
# 8th-order weights and (8th minus 7th) error weights.
_B8 = np.array([0, 0, 0, 0, 0, 34 / 105, 9 / 35, 9 / 35, 9 / 280, 9 / 280,
                0, 41 / 840, 41 / 840])
_E = np.array([-41 / 840, 0, 0, 0, 0, 0, 0, 0, 0, 0, -41 / 840, 41 / 840,
               41 / 840])

# Local error is controlled against _CONTROL * tol; the slack absorbs the
# accumulation of local errors into global drift of conserved quantities.
_CONTROL = 0.02

STATUS_OK = 0
STATUS_MAX_STEPS = -1


@njit(cache=True, nogil=True)
def _rhs(y, kappa, out):
    out[0] = np.cos(y[2])
    out[1] = np.sin(y[2])
    out[2] = kappa * y[1]


@njit(cache=True, nogil=True)
def _step(y, h, kappa, K, ytmp, ynew, err):
    _rhs(y, kappa, K[0])
    for i in range(1, 13):
        for j in range(3):
            acc = 0.0
            for m in range(i):
                a = _A[i, m]
                if a != 0.0:
                    acc += a * K[m, j]
            ytmp[j] = y[j] + h * acc
        _rhs(ytmp, kappa, K[i])
    for j in range(3):
        sacc = 0.0
        eacc = 0.0
        for i in range(13):
            if _B8[i] != 0.0:
                sacc += _B8[i] * K[i, j]
            if _E[i] != 0.0:
                eacc += _E[i] * K[i, j]
        ynew[j] = y[j] + h * sacc
        err[j] = h * eacc


@njit(cache=True, nogil=True)
def integrate_nodes(z0, kappa, s_max, rtol, atol, max_steps):
    """Adaptive integration from (x, z, theta) = (0, z0, 0) over [0, s_max].

    Returns (s_nodes, y_nodes, status, nfev) with y_nodes[k] the accepted
    state at s_nodes[k]; status is STATUS_OK or STATUS_MAX_STEPS.
    """
    cap = 4096
    s_arr = np.empty(cap)
    y_arr = np.empty((cap, 3))
    y = np.array([0.0, z0, 0.0])
    s = 0.0
    s_arr[0] = 0.0
    y_arr[0] = y
    K = np.empty((13, 3))
    ytmp = np.empty(3)
    ynew = np.empty(3)
    err = np.empty(3)

    scale_th = max(abs(kappa * z0), abs(kappa), 1e-3)
    h = min(s_max, 0.05 / scale_th)
    n = 0
    nfev = 0
    nreject = 0
    while s < s_max:
        if h > s_max - s:
            h = s_max - s
        if h <= 1e-15 * max(1.0, s):
            # cannot advance; treat as controller failure
            return s_arr[: n + 1], y_arr[: n + 1], STATUS_MAX_STEPS, nfev
        _step(y, h, kappa, K, ytmp, ynew, err)
        nfev += 13
        enorm = 0.0
        for j in range(3):
            sc = (atol + rtol * max(abs(y[j]), abs(ynew[j]))) * _CONTROL
            e = abs(err[j]) / sc
            if e > enorm:
                enorm = e
        if enorm <= 1.0:
            s += h
            for j in range(3):
                y[j] = ynew[j]
            n += 1
            if n + 1 > cap:
                new_cap = cap * 2
                s_new = np.empty(new_cap)
                y_new = np.empty((new_cap, 3))
                s_new[:cap] = s_arr
                y_new[:cap] = y_arr
                s_arr = s_new
                y_arr = y_new
                cap = new_cap
            if n > max_steps:
                return s_arr[: n + 1], y_arr[: n + 1], STATUS_MAX_STEPS, nfev
            s_arr[n] = s
            y_arr[n] = y
            if enorm == 0.0:
                fac = 1.6
            else:
                fac = min(1.6, 0.9 * enorm ** (-1.0 / 8.0))
            h = h * fac
            nreject = 0
        else:
            nreject += 1
            if nreject > 60:
                return s_arr[: n + 1], y_arr[: n + 1], STATUS_MAX_STEPS, nfev
            h = h * max(0.2, 0.9 * enorm ** (-1.0 / 8.0))
    return s_arr[: n + 1], y_arr[: n + 1], STATUS_OK, nfev


@njit(cache=True, nogil=True)
def dense_eval(s_nodes, y_nodes, kappa, queries, out):
    """Evaluate the solution at arbitrary arclengths in [s_nodes[0], s_nodes[-1]].

    Each query takes one Runge-Kutta sub-step from the nearest node on its
    left, so accuracy matches the accepted-step local error.
    """
    n = s_nodes.shape[0]
    K = np.empty((13, 3))
    ytmp = np.empty(3)
    ynew = np.empty(3)
    err = np.empty(3)
    for q in range(queries.shape[0]):
        sq = queries[q]
        k = np.searchsorted(s_nodes, sq) - 1
        if k < 0:
            k = 0
        if k > n - 2:
            k = n - 2
        h = sq - s_nodes[k]
        if h == 0.0:
            for j in range(3):
                out[q, j] = y_nodes[k, j]
        else:
            _step(y_nodes[k], h, kappa, K, ytmp, ynew, err)
            for j in range(3):
                out[q, j] = ynew[j]
