"""Brownian angle dynamics, winding tracking, and rotation stopping times.

The free end X_n winds continuously around the origin; tau is the first
time its accumulated winding angle reaches +-2*pi. The per-step
increment of the winding angle is the principal argument of
X(t+dt)/X(t), which is exact as long as single steps never swing the
position by more than pi.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import backend, model

TWO_PI = 2.0 * math.pi

HIT = "hit"
TIMEOUT = "timeout"
ORIGIN_FAILURE = "origin_failure"

_KIND_BY_STATUS = {
    backend.STATUS_HIT: HIT,
    backend.STATUS_TIMEOUT: TIMEOUT,
    backend.STATUS_ORIGIN: ORIGIN_FAILURE,
}

class OriginFailure(RuntimeError):
    """A tracked position came too close to the origin to take arguments."""


@dataclass(frozen=True)
class StopOutcome:
    kind: str
    tau: float
    steps: int


@dataclass(frozen=True)
class WindingState:
    """Snapshot of the chain: time, angles, free end, accumulated winding.

    per_bead_phi holds the winding angles of beads kmin..n when the
    state tracks every eligible bead, else None. Treat instances as
    values; evolve_step returns a new one.
    """

    params: model.PolymerParams
    t: float
    angles: np.ndarray
    free_end: complex
    phi: float
    per_bead_phi: np.ndarray = None
    kmin: int = None


def winding_increment(prev, nxt, eps_origin=0.0):
    """Principal argument of nxt/prev in (-pi, pi].

    Raises OriginFailure when either point lies within eps_origin of
    the origin (with the default 0.0, only for exact zeros).
    """
    prev = complex(prev)
    nxt = complex(nxt)
    if abs(prev) <= eps_origin or abs(nxt) <= eps_origin:
        raise OriginFailure("position too close to the origin for winding")
    x = nxt.real * prev.real + nxt.imag * prev.imag
    y = nxt.imag * prev.real - nxt.real * prev.imag
    return math.atan2(y, x)


def eligible_kmin(params):
    """Smallest bead index that can encircle the origin (k*l0 > L)."""
    k = int(math.floor(params.L / params.l0)) + 1
    while k * params.l0 <= params.L:
        k += 1
    return k


def initial_state(params, config, rng=None, track_eligible=False):
    """Realize a configuration into a WindingState at t = 0."""
    angles = model.realize_angles(config, params, rng)
    windings = model.chain_windings(angles, params)
    pos = model.bead_positions(angles, params)
    if track_eligible:
        kmin = eligible_kmin(params)
        per_bead = windings[kmin - 1 :].copy()
    else:
        kmin = None
        per_bead = None
    return WindingState(
        params=params,
        t=0.0,
        angles=angles,
        free_end=complex(pos[-1]),
        phi=float(windings[-1]),
        per_bead_phi=per_bead,
        kmin=kmin,
    )


def evolve_step(state, dt, rng):
    """One Euler step: each angle gets an independent N(0, 2*D*dt) kick.

    The free end is recomputed from the angles, never drifted, and all
    tracked winding accumulators pick up their principal-argument
    increments.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    p = state.params
    sigma = math.sqrt(2.0 * p.D * dt)
    angles = state.angles + sigma * rng.standard_normal(p.n)
    eps = p.origin_eps
    pos_new = model.bead_positions(angles, p)
    nxt = complex(pos_new[-1])
    phi = state.phi + winding_increment(state.free_end, nxt, eps)
    per_bead = None
    if state.per_bead_phi is not None:
        lo = state.kmin - 1
        prev_pos = model.bead_positions(state.angles, p)[lo:]
        new_pos = pos_new[lo:]
        if np.any(np.abs(new_pos) <= eps) or np.any(np.abs(prev_pos) <= eps):
            raise OriginFailure("tracked bead too close to the origin")
        x = new_pos.real * prev_pos.real + new_pos.imag * prev_pos.imag
        y = new_pos.imag * prev_pos.real - new_pos.real * prev_pos.imag
        per_bead = state.per_bead_phi + np.arctan2(y, x)
    return WindingState(
        params=p,
        t=state.t + dt,
        angles=angles,
        free_end=nxt,
        phi=phi,
        per_bead_phi=per_bead,
        kmin=state.kmin,
    )


def _check_step_resolution(params, dt):
    # Angle kicks of a radian per step make the principal-argument
    # winding increments unreliable.
    if math.sqrt(2.0 * params.D * dt) >= 1.0:
        warnings.warn(
            "per-step angle kick sqrt(2*D*dt) >= 1 rad; decrease dt to "
            "resolve winding increments",
            RuntimeWarning,
            stacklevel=3,
        )


def _run_stopping(params, config, dt, t_max, rng, kmin, eps_origin):
    if not dt > 0.0 or not t_max > 0.0:
        raise ValueError("dt and t_max must be positive")
    _check_step_resolution(params, dt)
    eps = params.origin_eps if eps_origin is None else eps_origin
    angles = model.realize_angles(config, params, rng)
    phi0 = model.chain_windings(angles, params)[kmin - 1 :]
    if np.any(np.abs(phi0) >= TWO_PI):
        # already wound at t = 0; the stopping time is attained at 0
        return StopOutcome(kind=HIT, tau=0.0, steps=0)
    sigma = math.sqrt(2.0 * params.D * dt)
    max_steps = int(math.ceil(t_max / dt - 1e-9))
    status, tau, steps = backend.run_single(
        angles, phi0, params.L, params.l0, kmin, sigma, dt, max_steps, eps * eps, rng
    )
    return StopOutcome(kind=_KIND_BY_STATUS[status], tau=tau, steps=steps)


def first_rotation_time(params, config, dt, t_max, rng, eps_origin=None):
    """Simulate until the free end's |phi| reaches 2*pi.

    The reported tau linearly interpolates the crossing inside the
    final step. Timeout once t_max is exhausted; OriginFailure when the
    free end passes within eps_origin (default 1e-9*l0) of the origin.
    """
    return _run_stopping(params, config, dt, t_max, rng, params.n, eps_origin)


def min_rotation_time(params, config, dt, t_max, rng, eps_origin=None):
    """First time ANY eligible bead (k*l0 > L) winds to +-2*pi."""
    return _run_stopping(
        params, config, dt, t_max, rng, eligible_kmin(params), eps_origin
    )


class _ArrayDraws:
    """Generator stand-in replaying precomputed standard-normal rows."""

    def __init__(self, rows):
        self._rows = np.ascontiguousarray(rows, dtype=float)
        self._next = 0

    def standard_normal(self, size):
        m, n = size
        out = self._rows[self._next : self._next + m]
        if out.shape != (m, n):
            raise ValueError("increment array exhausted or misshaped")
        self._next += m
        return out


def rotation_times_from_increments(
    params, theta0, increments, dt, kmin=None, eps_origin=None
):
    """Stopping times driven by explicit angle increments.

    increments has shape (replicates, steps, n) and holds the physical
    angle changes per step (already scaled by sqrt(2*D*dt)). Useful for
    coupled discretization checks and backend cross-validation, where
    two runs must see the same underlying noise.

    Returns (status, tau, steps) arrays; status uses the backend codes.
    """
    from . import _pykernel

    inc = np.asarray(increments, dtype=float)
    if inc.ndim != 3 or inc.shape[2] != params.n:
        raise ValueError("increments must have shape (replicates, steps, n)")
    reps, m, _ = inc.shape
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.ndim == 1:
        theta0 = np.broadcast_to(theta0, (reps, params.n))
    if kmin is None:
        kmin = params.n
    eps = params.origin_eps if eps_origin is None else eps_origin
    phi0 = np.empty((reps, params.n - kmin + 1))
    for r in range(reps):
        phi0[r] = model.chain_windings(theta0[r], params)[kmin - 1 :]

    status = np.full(reps, _pykernel.STATUS_HIT, dtype=np.int64)
    tau = np.zeros(reps)
    steps = np.zeros(reps, dtype=np.int64)
    todo = np.flatnonzero(np.abs(phi0).max(axis=1) < TWO_PI)
    if todo.size:
        gens = [_ArrayDraws(inc[r]) for r in todo]
        st, tu, sp = _pykernel.run_batch(
            theta0[todo], phi0[todo], params.L, params.l0, kmin,
            1.0, dt, m, eps * eps, gens,
        )
        status[todo] = st
        tau[todo] = tu
        steps[todo] = sp
    return status, tau, steps


def _circle_entry(R, params):
    """Intersection of the radius-R circle with the first rod's reach.

    Returns (x, y) with y >= 0, the landing point of a rod of length l0
    anchored at (L, 0), or None when the circles do not meet.
    """
    L, l0 = params.L, params.l0
    x = (R * R + L * L - l0 * l0) / (2.0 * L)
    y2 = R * R - x * x
    if y2 < -1e-15 * R * R:
        return None
    return x, math.sqrt(max(y2, 0.0))


def _arc_winding(R, m, params):
    # winding of: anchor -> circle R, then m-1 chords around that circle
    entry = _circle_entry(R, params)
    if entry is None:
        return math.nan
    a1 = math.atan2(entry[1], entry[0])
    return a1 + (m - 1) * 2.0 * math.asin(params.l0 / (2.0 * R))


def _arc_angles(R, m, params):
    entry = _circle_entry(R, params)
    psi1 = math.atan2(entry[1], entry[0])
    beta = 2.0 * math.asin(params.l0 / (2.0 * R))
    psi = psi1 + beta * np.arange(m)
    pts = np.empty((params.n + 1, 2))
    pts[0] = (params.L, 0.0)
    pts[1 : m + 1, 0] = R * np.cos(psi)
    pts[1 : m + 1, 1] = R * np.sin(psi)
    for k in range(m + 1, params.n + 1):
        x, y = pts[k - 1]
        s = (math.hypot(x, y) + params.l0) / math.hypot(x, y)
        pts[k] = (s * x, s * y)
    seg = np.diff(pts, axis=0)
    return np.arctan2(seg[:, 1], seg[:, 0])


def boundary_layer_config(phi0, params):
    """Explicit configuration whose free end starts wound to phi0.

    The chain steps from the anchor onto a circle of radius R around
    the origin, walks chords on that circle (each worth a fixed winding
    increment), and spends any leftover rods radially outward where
    they add no winding. R is solved so the total winding is exactly
    phi0, using the fewest rods on the circle that can reach it.

    phi0 = 0 returns the stretched layout; |phi0| >= 2*pi is rejected;
    targets beyond what n rods can wind around this origin raise as
    unachievable.
    """
    phi0 = float(phi0)
    if not abs(phi0) < TWO_PI:
        raise ValueError("boundary-layer target must satisfy |phi0| < 2*pi")
    if phi0 == 0.0:
        return model.explicit(np.zeros(params.n))
    if params.L <= 0.0:
        raise ValueError("boundary-layer construction needs L > 0")
    target = abs(phi0)
    # R below l0/2 puts a chord through the origin; R outside
    # [|l0-L|, l0+L] is out of the first rod's reach
    r_lo = max(0.5 * params.l0, abs(params.l0 - params.L)) * (1.0 + 1e-9)
    r_hi = params.l0 + params.L
    angles = None
    for m in range(1, params.n + 1):
        f_lo = _arc_winding(r_lo, m, params) - target
        f_hi = _arc_winding(r_hi, m, params) - target
        if math.isnan(f_lo) or math.isnan(f_hi) or f_lo * f_hi > 0.0:
            continue
        root = brentq(
            lambda R: _arc_winding(R, m, params) - target, r_lo, r_hi,
            xtol=1e-15,
        )
        angles = _arc_angles(root, m, params)
        break
    if angles is None:
        raise ValueError(
            f"cannot reach initial winding {phi0!r} with n={params.n}, "
            f"L={params.L}, l0={params.l0}"
        )
    if phi0 < 0.0:
        angles = -angles
    achieved = model.initial_winding(angles, params)
    if abs(achieved - phi0) > 1e-6:
        raise ValueError(
            f"boundary-layer construction landed at {achieved}, wanted {phi0}"
        )
    return model.explicit(angles)
