"""Empirical checks of the Gaussian limit of the rescaled free end.

Everything here works in scaled time with unit-variance driving
noises; the polymer parameters never enter. Sampling routines take an
explicit numpy Generator so callers control the stream layout.
"""

import dataclasses
import math

import numpy as np


@dataclasses.dataclass(frozen=True)
class QvPath:
    """Quadratic variation/covariation paths on a uniform grid."""

    times: np.ndarray
    qv_s: np.ndarray
    qv_c: np.ndarray
    qv_sc: np.ndarray


@dataclasses.dataclass(frozen=True)
class ZnReport:
    n: int
    t: float
    replicates: int
    mean_re: float
    mean_im: float
    se_mean_re: float
    se_mean_im: float
    var_re: float
    var_im: float
    se_var_re: float
    se_var_im: float
    cov: float
    se_cov: float
    theory_var_re: float
    theory_var_im: float


def _grid(t_end, dt):
    if not t_end > 0 or not dt > 0:
        raise ValueError("t_end and dt must be positive")
    steps = max(1, int(round(t_end / dt)))
    return steps, np.arange(steps + 1) * (t_end / steps)


def empirical_qv(n, t_end, dt, rng):
    """Riemann-sum brackets of the n-angle martingale pair.

    Accumulates (1/n) sum sin^2(B_k), (1/n) sum cos^2(B_k) and
    -(1/2n) sum sin(2 B_k) over the grid, left endpoints, from n
    independent standard BM angle paths.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    steps, times = _grid(t_end, dt)
    h = times[1]
    paths = np.cumsum(rng.standard_normal((steps, n)) * math.sqrt(h), axis=0)
    # left endpoints: B(t_0) = 0, then the first steps-1 rows
    left = np.vstack([np.zeros(n), paths[: steps - 1]])
    s = np.sin(left)
    c = np.cos(left)
    inc_s = h * np.mean(s * s, axis=1)
    inc_c = h * np.mean(c * c, axis=1)
    inc_sc = -h * np.mean(s * c, axis=1)
    zero = np.zeros(1)
    return QvPath(
        times=times,
        qv_s=np.concatenate([zero, np.cumsum(inc_s)]),
        qv_c=np.concatenate([zero, np.cumsum(inc_c)]),
        qv_sc=np.concatenate([zero, np.cumsum(inc_sc)]),
    )


def theory_qv(t):
    """Limit brackets (t/2 - (1-e^{-2t})/4, t/2 + (1-e^{-2t})/4, 0)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("t must be nonnegative")
    half = 0.5 * arr
    bump = -0.25 * np.expm1(-2.0 * arr)
    if arr.ndim == 0:
        return float(half - bump), float(half + bump), 0.0
    return half - bump, half + bump, np.zeros_like(arr)


def _volatility_weights(times, h):
    # sqrt(sinh s * h) and sqrt(cosh s * h) at left endpoints, written
    # against e^{s/2} so nothing cancels at s = 0
    s = times[:-1]
    grow = np.exp(0.5 * s)
    w_re = grow * np.sqrt(-0.5 * np.expm1(-2.0 * s) * h)
    w_im = grow * np.sqrt(0.5 * (1.0 + np.exp(-2.0 * s)) * h)
    return w_re, w_im


def sample_limit_Z(t_end, dt, rng):
    """One path of the limit process on a uniform grid.

    Euler with left-endpoint volatilities sqrt(sinh s), sqrt(cosh s)
    on independent driving noises, then the e^{-t/2} envelope.
    Returns (times, z) with z complex.
    """
    steps, times = _grid(t_end, dt)
    w_re, w_im = _volatility_weights(times, times[1])
    dre = w_re * rng.standard_normal(steps)
    dim = w_im * rng.standard_normal(steps)
    z = np.empty(steps + 1, dtype=complex)
    z[0] = 0.0
    z[1:] = np.cumsum(dre) + 1j * np.cumsum(dim)
    z *= np.exp(-0.5 * times)
    return times, z


def sample_limit_Z_final(t_end, dt, n_paths, rng):
    """Terminal values of n_paths independent limit-process paths.

    Same discretization as sample_limit_Z, drawn in blocks; returns
    (re, im) arrays of length n_paths.
    """
    if int(n_paths) != n_paths or n_paths < 1:
        raise ValueError("n_paths must be a positive integer")
    steps, times = _grid(t_end, dt)
    w_re, w_im = _volatility_weights(times, times[1])
    damp = math.exp(-0.5 * times[-1])
    re = np.empty(n_paths)
    im = np.empty(n_paths)
    block = max(1, int(4_000_000 // max(steps, 1)))
    done = 0
    while done < n_paths:
        m = min(block, n_paths - done)
        re[done:done + m] = rng.standard_normal((m, steps)) @ w_re
        im[done:done + m] = rng.standard_normal((m, steps)) @ w_im
        done += m
    re *= damp
    im *= damp
    return re, im


def _se_var(x, mean, var):
    d2 = (x - mean) ** 2
    m4 = float(np.mean(d2 * d2))
    return math.sqrt(max(m4 - var * var, 0.0) / x.size)


def compare_Zn_to_limit(n, t, replicates, rng):
    """Moment report for the centered empirical sum at one time point.

    Z^(n)_t = (1/sqrt n) sum_k (e^{i B_k(t)} - e^{-t/2}) over n angle
    paths, replicated; the centering uses the exact per-angle mean.
    Coordinate variances of Z^(n) match the limit formulas at every n,
    so the report's theory columns need no finite-n correction.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not t > 0:
        raise ValueError("t must be positive")
    if int(replicates) != replicates or replicates < 2:
        raise ValueError("need at least 2 replicates")
    center = math.exp(-0.5 * t)
    root = math.sqrt(n)
    re = np.empty(replicates)
    im = np.empty(replicates)
    block = max(1, int(2_000_000 // n))
    done = 0
    while done < replicates:
        m = min(block, replicates - done)
        B = math.sqrt(t) * rng.standard_normal((m, n))
        re[done:done + m] = root * (np.cos(B).mean(axis=1) - center)
        im[done:done + m] = root * np.sin(B).mean(axis=1)
        done += m

    mean_re = float(re.mean())
    mean_im = float(im.mean())
    var_re = float(re.var(ddof=1))
    var_im = float(im.var(ddof=1))
    cov = float(np.cov(re, im, ddof=1)[0, 1])
    d_re = re - mean_re
    d_im = im - mean_im
    se_cov = math.sqrt(
        max(float(np.mean((d_re * d_im) ** 2)) - cov * cov, 0.0) / replicates
    )
    e2t = math.exp(-2.0 * t)
    return ZnReport(
        n=int(n),
        t=float(t),
        replicates=int(replicates),
        mean_re=mean_re,
        mean_im=mean_im,
        se_mean_re=math.sqrt(var_re / replicates),
        se_mean_im=math.sqrt(var_im / replicates),
        var_re=var_re,
        var_im=var_im,
        se_var_re=_se_var(re, mean_re, var_re),
        se_var_im=_se_var(im, mean_im, var_im),
        cov=cov,
        se_cov=se_cov,
        theory_var_re=0.5 * (1.0 + e2t) - center * center,
        theory_var_im=0.5 * (1.0 - e2t),
    )
