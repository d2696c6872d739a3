"""Replicate harness and Monte Carlo validations.

Every estimator here is a pure function of (inputs, seed). Replicated
experiments draw each replicate from its own counter-based stream, so
results do not depend on scheduling or on max_workers_hint; see
streams.py for the layout.
"""

import dataclasses
import math
import warnings

import numpy as np

from . import backend, model, sde
from .streams import (
    TAG_BM_WINDING,
    TAG_EXPFUNC,
    TAG_LAPLACE,
    TAG_WINDING,
    experiment_stream,
    replicate_stream,
)

TWO_PI = 2.0 * np.pi

TIMEOUT_WARN_FRAC = 0.01

_AXES = ("n", "D", "L", "phi0")


class EstimationError(RuntimeError):
    """Raised when no replicate produced a usable stopping time."""


@dataclasses.dataclass(frozen=True)
class McConfig:
    """Replicate-harness knobs; seed is the root of every stream."""

    replicates: int
    dt: float = 0.01
    t_max: float = 100.0
    seed: int = 0
    max_workers_hint: int = 1

    def __post_init__(self):
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ValueError("replicates must be a positive integer")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max > self.dt:
            raise ValueError("t_max must exceed dt")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if int(self.max_workers_hint) != self.max_workers_hint or self.max_workers_hint < 1:
            raise ValueError("max_workers_hint must be a positive integer")


@dataclasses.dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float | None
    n_used: int
    n_timeout: int
    n_origin_fail: int


@dataclasses.dataclass(frozen=True)
class LaplaceCheck:
    empirical: float
    stderr: float
    analytic: float
    n_timeout: int


@dataclasses.dataclass(frozen=True)
class SweepRow:
    value: float
    estimate: McEstimate | None
    feasible: bool
    note: str = ""


def _collect(params, config, mc, kmin, row):
    """Run all replicates; returns (status, tau) arrays of length replicates.

    A start configuration whose tracked winding already meets the target
    is an immediate hit (tau = 0); a start with a tracked bead on the
    origin counts as an origin failure.
    """
    reps = mc.replicates
    n = params.n
    ne = n - kmin + 1
    gens = [replicate_stream(mc.seed, TAG_WINDING, row, r) for r in range(reps)]

    theta0 = np.empty((reps, n))
    phi0 = np.empty((reps, ne))
    status = np.full(reps, backend.STATUS_TIMEOUT, dtype=np.int64)
    tau = np.full(reps, np.nan)
    bad = np.zeros(reps, dtype=bool)
    for r in range(reps):
        theta0[r] = model.realize_angles(config, params, gens[r])
        try:
            phi0[r] = model.chain_windings(theta0[r], params)[kmin - 1:]
        except ValueError:
            bad[r] = True
            status[r] = backend.STATUS_ORIGIN

    wound = np.zeros(reps, dtype=bool)
    wound[~bad] = np.abs(phi0[~bad]).max(axis=1) >= TWO_PI if ne else False
    status[wound] = backend.STATUS_HIT
    tau[wound] = 0.0

    todo = np.flatnonzero(~(bad | wound))
    if todo.size:
        sigma = math.sqrt(2.0 * params.D * mc.dt)
        max_steps = int(math.ceil(mc.t_max / mc.dt - 1e-9))
        eps = params.origin_eps
        st, tu, _ = backend.run_many(
            theta0[todo], phi0[todo], params.L, params.l0, kmin,
            sigma, mc.dt, max_steps, eps * eps,
            [gens[r] for r in todo], max_workers=mc.max_workers_hint,
        )
        status[todo] = st
        tau[todo] = tu
    return status, tau


def _summarize(status, tau, reps):
    used = status == backend.STATUS_HIT
    n_used = int(used.sum())
    n_timeout = int((status == backend.STATUS_TIMEOUT).sum())
    n_origin = int((status == backend.STATUS_ORIGIN).sum())
    if n_used == 0:
        raise EstimationError(
            f"all {reps} replicates failed ({n_timeout} timeout, {n_origin} origin)"
        )
    if n_timeout > TIMEOUT_WARN_FRAC * reps:
        warnings.warn(
            f"{n_timeout} of {reps} replicates timed out; mean is conditional on hitting",
            RuntimeWarning,
            stacklevel=3,
        )
    hits = tau[used]
    mean = float(hits.mean())
    stderr = float(hits.std(ddof=1) / math.sqrt(n_used)) if n_used >= 2 else None
    return McEstimate(mean, stderr, n_used, n_timeout, n_origin)


def estimate_mrt(params, config, mc, row=0):
    """Mean first time the free end's winding reaches ±2π.

    Timeouts and origin failures are excluded from the mean and
    surfaced in the counts; the estimator is a conditional mean.
    """
    status, tau = _collect(params, config, mc, params.n, row)
    return _summarize(status, tau, mc.replicates)


def estimate_mmrt(params, config, mc, row=0):
    """Mean first time ANY eligible bead's winding reaches ±2π."""
    status, tau = _collect(params, config, mc, sde.eligible_kmin(params), row)
    return _summarize(status, tau, mc.replicates)


def _point(params, axis, value, config):
    if axis == "n":
        if int(value) != value:
            raise ValueError(f"n must be an integer, got {value!r}")
        return dataclasses.replace(params, n=int(value)), config
    if axis == "D":
        return dataclasses.replace(params, D=float(value)), config
    if axis == "L":
        return dataclasses.replace(params, L=float(value)), config
    return params, model.boundary_layer(float(value))


def sweep(params, axis, values, config, mc, estimator="mrt"):
    """One estimate per value, rows in input order.

    Infeasible or invalid points are flagged rows, never silent skips.
    Row index feeds the stream layout, so each row's replicates are
    reproducible in isolation.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}")
    if estimator not in ("mrt", "mmrt"):
        raise ValueError("estimator must be 'mrt' or 'mmrt'")
    est_fn = estimate_mrt if estimator == "mrt" else estimate_mmrt
    rows = []
    for i, value in enumerate(values):
        try:
            p, cfg = _point(params, axis, value, config)
        except model.InfeasibleModelError as err:
            rows.append(SweepRow(float(value), None, False, str(err)))
            continue
        except ValueError as err:
            rows.append(SweepRow(float(value), None, False, str(err)))
            continue
        try:
            est = est_fn(p, cfg, mc, row=i)
        except EstimationError as err:
            rows.append(SweepRow(float(value), None, True, str(err)))
            continue
        rows.append(SweepRow(float(value), est, True))
    return rows


def laplace_check(c, y, mc):
    """Exit-time Laplace functional of 1-D BM from (-c, c) vs 1/cosh(yc).

    Euler steps carry a Brownian-bridge crossing correction: a step that
    stays inside the interval still exits with probability
    exp(-2(c-w)(c-w')/dt) + exp(-2(c+w)(c+w')/dt), which removes the
    O(sqrt(dt)) one-sided bias of the naive scheme. Paths still inside
    at t_max are censored there.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if y < 0:
        raise ValueError("y must be nonnegative")
    rng = experiment_stream(mc.seed, TAG_LAPLACE)
    reps = mc.replicates
    dt = mc.dt
    sdt = math.sqrt(dt)
    max_steps = int(math.ceil(mc.t_max / dt - 1e-9))

    T = np.full(reps, mc.t_max)
    alive = np.arange(reps)
    w = np.zeros(reps)
    t = 0.0
    for _ in range(max_steps):
        if alive.size == 0:
            break
        z = rng.standard_normal(alive.size)
        u = rng.random(alive.size)
        w_new = w + sdt * z

        up = w_new >= c
        dn = w_new <= -c
        inside = ~(up | dn)
        frac = np.empty(alive.size)
        dw = w_new - w
        with np.errstate(divide="ignore", invalid="ignore"):
            frac[up] = (c - w[up]) / dw[up]
            frac[dn] = (-c - w[dn]) / dw[dn]
            p_up = np.exp(-2.0 * (c - w) * (c - w_new) / dt)
            p_dn = np.exp(-2.0 * (c + w) * (c + w_new) / dt)
        bridge = inside & (u < np.clip(p_up + p_dn, 0.0, 1.0))
        frac[bridge] = 0.5

        exited = up | dn | bridge
        T[alive[exited]] = t + frac[exited] * dt
        alive = alive[~exited]
        w = w_new[~exited]
        t += dt

    n_timeout = int(alive.size)
    vals = np.exp(-0.5 * y * y * T)
    empirical = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(reps)) if reps >= 2 else 0.0
    with np.errstate(over="ignore"):
        analytic = float(1.0 / np.cosh(y * c))
    return LaplaceCheck(empirical, stderr, analytic, n_timeout)


def exp_functional_inverse_moment(t, mc, return_coarse=False):
    """MC estimate of E[1/A_t] with A_t = trapezoid of exp(2*BM) on [0, t].

    The grid uses M = round(t/dt) uniform steps. With return_coarse the
    same paths are re-integrated on every second grid point, giving a
    coupled doubled-dt estimate whose gap bounds the discretization
    bias (the sampling noise cancels in the difference).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    rng = experiment_stream(mc.seed, TAG_EXPFUNC)
    reps = mc.replicates
    M = max(1, int(round(t / mc.dt)))
    h = t / M
    K = M // 2

    block = max(1, min(reps, int(4_000_000 // M)))
    inv = np.empty(reps)
    inv_c = np.empty(reps)
    done = 0
    while done < reps:
        m = min(block, reps - done)
        beta = np.cumsum(rng.standard_normal((m, M)) * math.sqrt(h), axis=1)
        E = np.exp(2.0 * beta)
        A = h * (0.5 + E[:, : M - 1].sum(axis=1) + 0.5 * E[:, M - 1])
        inv[done:done + m] = 1.0 / A

        if K:
            interior = E[:, 1:2 * K - 2:2].sum(axis=1) if K > 1 else 0.0
            Ac = 2.0 * h * (0.5 + interior + 0.5 * E[:, 2 * K - 1])
        else:
            Ac = np.zeros(m)
        if M % 2:
            left = E[:, M - 2] if M > 1 else 1.0
            Ac = Ac + 0.5 * h * (left + E[:, M - 1])
        inv_c[done:done + m] = 1.0 / Ac
        done += m

    mean = float(inv.mean())
    stderr = float(inv.std(ddof=1) / math.sqrt(reps)) if reps >= 2 else None
    est = McEstimate(mean, stderr, reps, 0, 0)
    if return_coarse:
        return est, float(inv_c.mean())
    return est


def bm_winding_times(c, replicates, seed, angle_var=2e-3, h_max=320.0):
    """Exit times of the continuous winding of planar BM from (1, 0).

    Steps adapt as dt = angle_var * |Z|^2, so the angular increment has
    constant variance and the angular clock advances by angle_var per
    step regardless of how far the path wanders. The cap h_max is on
    that clock; capped paths are dropped with a warning (their count is
    Exp-small in h_max).
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if replicates < 1:
        raise ValueError("replicates must be positive")
    rng = experiment_stream(seed, TAG_BM_WINDING)
    max_steps = int(math.ceil(h_max / angle_var))

    x = np.ones(replicates)
    y = np.zeros(replicates)
    phi = np.zeros(replicates)
    t = np.zeros(replicates)
    T = np.full(replicates, np.nan)
    alive = np.arange(replicates)
    for _ in range(max_steps):
        if alive.size == 0:
            break
        r2 = x * x + y * y
        if np.any(r2 < 1e-300):
            raise FloatingPointError("path collapsed onto the origin")
        dt = angle_var * r2
        sdt = np.sqrt(dt)
        z = rng.standard_normal((alive.size, 2))
        xn = x + sdt * z[:, 0]
        yn = y + sdt * z[:, 1]
        dphi = np.arctan2(x * yn - y * xn, x * xn + y * yn)
        phin = phi + dphi
        tn = t + dt

        hit = np.abs(phin) >= c
        if np.any(hit):
            frac = (c - np.abs(phi[hit])) / (np.abs(phin[hit]) - np.abs(phi[hit]))
            T[alive[hit]] = t[hit] + frac * dt[hit]
            keep = ~hit
            alive = alive[keep]
            x, y, phi, t = xn[keep], yn[keep], phin[keep], tn[keep]
        else:
            x, y, phi, t = xn, yn, phin, tn

    if alive.size:
        if alive.size == replicates:
            raise EstimationError("no winding path exited below the clock cap")
        warnings.warn(
            f"{alive.size} of {replicates} winding paths hit the clock cap and were dropped",
            RuntimeWarning,
            stacklevel=2,
        )
    return T[~np.isnan(T)]
