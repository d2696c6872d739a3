# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Sequential winding kernel: the compiled backend.

Mirrors _pykernel semantics exactly: tracked beads are kmin..n, an
origin failure inside a step beats a hit detected in the same step,
and hits interpolate |phi| through 2*pi linearly within the step.
"""

import numpy as np

from libc.math cimport atan2, cos, sin, M_PI


def run_path(double[::1] theta, double[::1] phi, double L, double l0,
             Py_ssize_t kmin, double sigma, double dt, Py_ssize_t max_steps,
             double eps2, object rng, Py_ssize_t chunk=64):
    """Evolve one replicate to its stopping time.

    theta (n,) and phi (n - kmin + 1,) are updated in place; phi must be
    chain-consistent with theta at entry. rng supplies standard normal
    draws in (m, n) blocks, so any object with a compatible
    standard_normal method can drive the path.

    Returns (status, tau, steps); status 0 = hit, 1 = timeout, 2 = origin.
    """
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t ne = phi.shape[0]
    if ne != n - kmin + 1:
        raise ValueError("phi must cover beads kmin..n")
    if chunk < 1:
        raise ValueError("chunk must be positive")

    px_arr = np.empty(ne)
    py_arr = np.empty(ne)
    cdef double[::1] px = px_arr
    cdef double[::1] py = py_arr
    cdef double target = 2.0 * M_PI
    cdef double ax, ay, tx, ty, inc, newphi, absold, absnew, frac, best
    cdef Py_ssize_t k, e, s, m, step = 0
    cdef int status = 1, done = 0, hit
    cdef double tau = float("nan")
    cdef double[:, ::1] z

    ax = L
    ay = 0.0
    for k in range(n):
        ax += l0 * cos(theta[k])
        ay += l0 * sin(theta[k])
        if k + 1 >= kmin:
            px[k + 1 - kmin] = ax
            py[k + 1 - kmin] = ay

    while step < max_steps and not done:
        m = chunk if max_steps - step > chunk else max_steps - step
        z = rng.standard_normal((m, n))
        with nogil:
            for s in range(m):
                step += 1
                ax = L
                ay = 0.0
                hit = 0
                best = 0.0
                for k in range(n):
                    theta[k] += sigma * z[s, k]
                    ax += l0 * cos(theta[k])
                    ay += l0 * sin(theta[k])
                    if k + 1 < kmin:
                        continue
                    e = k + 1 - kmin
                    tx = px[e]
                    ty = py[e]
                    if ax * ax + ay * ay <= eps2:
                        status = 2
                        done = 1
                    inc = atan2(ay * tx - ax * ty, ax * tx + ay * ty)
                    newphi = phi[e] + inc
                    absnew = newphi if newphi >= 0.0 else -newphi
                    if absnew >= target:
                        absold = phi[e] if phi[e] >= 0.0 else -phi[e]
                        frac = (target - absold) / (absnew - absold)
                        if not hit or frac < best:
                            best = frac
                            hit = 1
                    px[e] = ax
                    py[e] = ay
                    phi[e] = newphi
                if done:  # origin beats a same-step hit
                    break
                if hit:
                    status = 0
                    tau = (step - 1 + best) * dt
                    done = 1
                    break
    return status, tau, step
