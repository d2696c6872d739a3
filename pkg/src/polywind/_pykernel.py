"""Vectorized numpy winding kernel: the portable fallback backend.

Semantics are shared with the compiled kernel in _fastpath: beads
kmin..n are tracked, a step's origin failure takes precedence over a
hit detected in the same step, and hit times interpolate |phi| through
2*pi linearly within the crossing step.
"""

import numpy as np

STATUS_HIT = 0
STATUS_TIMEOUT = 1
STATUS_ORIGIN = 2

TWO_PI = 2.0 * np.pi

DEFAULT_CHUNK = 64


def tracked_positions(theta, L, l0, kmin):
    """Positions of beads kmin..n for angle rows theta (R, n)."""
    cx = L + l0 * np.cumsum(np.cos(theta), axis=1)
    cy = l0 * np.cumsum(np.sin(theta), axis=1)
    return cx[:, kmin - 1 :], cy[:, kmin - 1 :]


def run_batch(theta0, phi0, L, l0, kmin, sigma, dt, max_steps, eps2, gens,
              chunk=DEFAULT_CHUNK):
    """Evolve a batch of replicates to their stopping times.

    theta0 (R, n): initial angles. phi0 (R, E): initial winding of the
    tracked beads, chain-consistent at t = 0. gens: one generator per
    replicate; each replicate consumes only its own stream, so results
    are independent of batching.

    Returns (status, tau, steps) arrays indexed by replicate.
    """
    theta = np.array(theta0, dtype=float)
    phi_all = np.array(phi0, dtype=float)
    reps, n = theta.shape
    status = np.full(reps, STATUS_TIMEOUT, dtype=np.int64)
    tau = np.full(reps, np.nan)
    steps = np.full(reps, max_steps, dtype=np.int64)

    px_all, py_all = tracked_positions(theta, L, l0, kmin)
    active = np.arange(reps)
    done_step = 0
    while done_step < max_steps and active.size:
        m = min(chunk, max_steps - done_step)
        th = theta[active]
        px, py = px_all[active], py_all[active]
        phi = phi_all[active]
        z = np.stack([gens[i].standard_normal((m, n)) for i in active])
        alive = np.ones(active.size, dtype=bool)
        for s in range(m):
            step_now = done_step + s + 1
            th += sigma * z[:, s, :]
            xe, ye = tracked_positions(th, L, l0, kmin)
            orig = (xe * xe + ye * ye <= eps2).any(axis=1)
            inc = np.arctan2(ye * px - xe * py, xe * px + ye * py)
            newphi = phi + inc
            hit = (np.abs(newphi) >= TWO_PI).any(axis=1)

            fail_rows = orig & alive
            hit_rows = hit & ~orig & alive
            if fail_rows.any():
                idx = active[fail_rows]
                status[idx] = STATUS_ORIGIN
                steps[idx] = step_now
            if hit_rows.any():
                absold = np.abs(phi[hit_rows])
                absnew = np.abs(newphi[hit_rows])
                with np.errstate(divide="ignore", invalid="ignore"):
                    frac = np.where(
                        absnew >= TWO_PI, (TWO_PI - absold) / (absnew - absold), np.inf
                    )
                idx = active[hit_rows]
                status[idx] = STATUS_HIT
                tau[idx] = (step_now - 1 + frac.min(axis=1)) * dt
                steps[idx] = step_now
            alive &= ~(orig | hit)
            px, py, phi = xe, ye, newphi
            if not alive.any():
                break
        theta[active] = th
        px_all[active], py_all[active] = px, py
        phi_all[active] = phi
        active = active[alive]
        done_step += m
    return status, tau, steps
