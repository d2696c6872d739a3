"""Winding-kernel backend selection.

The compiled kernel (_fastpath, Cython) and the vectorized numpy
fallback (_pykernel) implement identical stopping semantics and consume
identical per-replicate random streams. They are not bit-identical:
libm and numpy transcendentals round differently, so stopping times can
differ at the last few ulps. Each backend is individually deterministic.

Selection order: set_backend() override, then the POLYWIND_BACKEND
environment variable ("fast" or "python"), then fast when compiled.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._pykernel import (  # noqa: F401  (re-exported status codes)
    DEFAULT_CHUNK,
    STATUS_HIT,
    STATUS_ORIGIN,
    STATUS_TIMEOUT,
    run_batch,
)

try:
    from . import _fastpath

    HAVE_FAST = True
except ImportError:
    _fastpath = None
    HAVE_FAST = False

_ENV_VAR = "POLYWIND_BACKEND"
_forced = None


def set_backend(name):
    """Force "fast"/"python" for this process; None restores auto."""
    global _forced
    if name not in (None, "fast", "python"):
        raise ValueError("backend must be 'fast', 'python', or None")
    if name == "fast" and not HAVE_FAST:
        raise RuntimeError("compiled kernel not available")
    _forced = name


def active_backend():
    if _forced is not None:
        return _forced
    env = os.environ.get(_ENV_VAR)
    if env in ("fast", "python"):
        if env == "fast" and not HAVE_FAST:
            raise RuntimeError(
                f"{_ENV_VAR}=fast but the compiled kernel is not available"
            )
        return env
    return "fast" if HAVE_FAST else "python"


def run_single(theta0, phi0, L, l0, kmin, sigma, dt, max_steps, eps2, rng):
    """One replicate on the active backend; returns (status, tau, steps)."""
    theta0 = np.array(theta0, dtype=float)
    phi0 = np.array(phi0, dtype=float)
    if active_backend() == "fast":
        return _fastpath.run_path(
            theta0, phi0, L, l0, kmin, sigma, dt, max_steps, eps2, rng
        )
    status, tau, steps = run_batch(
        theta0[None, :], phi0[None, :], L, l0, kmin, sigma, dt, max_steps, eps2, [rng]
    )
    return int(status[0]), float(tau[0]), int(steps[0])


def run_many(theta0, phi0, L, l0, kmin, sigma, dt, max_steps, eps2, gens,
             max_workers=1):
    """A batch of replicates; row r uses gens[r] and theta0[r]/phi0[r].

    Results are indexed by replicate and therefore independent of
    max_workers. The numpy backend vectorizes across the whole batch
    and ignores the worker hint.
    """
    theta0 = np.array(theta0, dtype=float)
    phi0 = np.array(phi0, dtype=float)
    reps = theta0.shape[0]
    if active_backend() == "python":
        return run_batch(
            theta0, phi0, L, l0, kmin, sigma, dt, max_steps, eps2, gens
        )
    status = np.empty(reps, dtype=np.int64)
    tau = np.empty(reps)
    steps = np.empty(reps, dtype=np.int64)

    def work(r):
        status[r], tau[r], steps[r] = _fastpath.run_path(
            theta0[r], phi0[r], L, l0, kmin, sigma, dt, max_steps, eps2, gens[r]
        )

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(work, range(reps)))
    else:
        for r in range(reps):
            work(r)
    return status, tau, steps
