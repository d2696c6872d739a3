"""Polymer geometry, rescaling, and initial configurations.

The chain is n rigid rods of length l0 anchored at (L, 0); bead k sits
at X_k = L + l0 * sum_{j<=k} exp(i*theta_j). Angles diffuse with
rotational constant D, and in the scaled time t~ = 2*D*t each angle is
a standard Brownian motion.
"""

import math
from dataclasses import dataclass

import numpy as np

# Rejection margin keeping random starts away from the winding boundary.
DEFAULT_EPS_CFG = 0.1

# Beads closer to the origin than this (times l0) make angle tracking
# meaningless; initial configurations are required to clear it.
ORIGIN_EPS_FACTOR = 1e-9

KIND_STRETCHED = "stretched"
KIND_EXPLICIT = "explicit"
KIND_UNIFORM = "uniform"
KIND_BOUNDARY_LAYER = "boundary_layer"

TWO_PI = 2.0 * math.pi


class InfeasibleModelError(ValueError):
    """Raised when n*l0 <= L: the chain cannot reach around the origin."""


@dataclass(frozen=True)
class PolymerParams:
    """Physical parameters of the rod chain.

    n: number of rods, D: rotational diffusion constant, L: distance of
    the fixed end from the origin, l0: rod length. D = 0 is admitted as
    a frozen-chain degenerate case (useful in tests); the asymptotic
    formulas require D > 0.
    """

    n: int
    D: float
    L: float
    l0: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        if not (self.D >= 0.0):
            raise ValueError("D must be nonnegative")
        if not (self.L >= 0.0):
            raise ValueError("L must be nonnegative")
        if not (self.l0 > 0.0):
            raise ValueError("l0 must be positive")
        if not (self.n * self.l0 > self.L):
            raise InfeasibleModelError(
                "winding infeasible: need n*l0 > L, got "
                f"n*l0 = {self.n * self.l0} <= L = {self.L}"
            )

    @property
    def origin_eps(self):
        return ORIGIN_EPS_FACTOR * self.l0


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless geometry and the physical->scaled time factor."""

    l_tilde: float
    time_scale: float

    def to_scaled(self, t):
        return self.time_scale * t

    def to_physical(self, t_scaled):
        if self.time_scale == 0.0:
            raise ZeroDivisionError("time_scale is 0 (D = 0 chain has no clock)")
        return t_scaled / self.time_scale


def rescale(params):
    """Scaled units: lengths in rod lengths, time t~ = 2*D*t.

    In scaled time the angle increments have unit variance rate, so
    every scaled-time expectation converts back as E[t] = E[t~]/(2D).
    """
    return ScaledParams(l_tilde=params.L / params.l0, time_scale=2.0 * params.D)


@dataclass(frozen=True)
class InitialConfig:
    """How the initial angles theta_k(0) are produced.

    Use the constructors `stretched`, `explicit`, `uniform_random`,
    `boundary_layer` rather than building instances by hand.
    """

    kind: str
    angles: tuple = None
    eps_cfg: float = DEFAULT_EPS_CFG
    phi0: float = None


def stretched():
    """All angles zero: the chain lies on the positive real axis."""
    return InitialConfig(kind=KIND_STRETCHED)


def explicit(angles):
    arr = np.asarray(angles, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("explicit angles must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("explicit angles must be finite")
    return InitialConfig(kind=KIND_EXPLICIT, angles=tuple(arr.tolist()))


def uniform_random(eps_cfg=DEFAULT_EPS_CFG):
    """Angles iid uniform on [0, 2*pi), resampled until the start is
    non-winding with margin eps_cfg."""
    if not (0.0 < eps_cfg < TWO_PI):
        raise ValueError("eps_cfg must lie in (0, 2*pi)")
    return InitialConfig(kind=KIND_UNIFORM, eps_cfg=eps_cfg)


def boundary_layer(phi0):
    """Start with the free end already wound to angle phi0 (|phi0| < 2*pi)."""
    phi0 = float(phi0)
    if not abs(phi0) < TWO_PI:
        raise ValueError("boundary-layer target must satisfy |phi0| < 2*pi")
    return InitialConfig(kind=KIND_BOUNDARY_LAYER, phi0=phi0)


def bead_positions(angles, params):
    """Positions X_1..X_n as complex numbers.

    X_k = L + l0 * sum_{j<=k} exp(i*theta_j); consecutive beads are
    exactly l0 apart.
    """
    arr = np.asarray(angles, dtype=float)
    if arr.shape != (params.n,):
        raise ValueError(f"expected {params.n} angles, got shape {arr.shape}")
    steps = params.l0 * np.exp(1j * arr)
    return params.L + np.cumsum(steps)


def free_end(angles, params):
    return bead_positions(angles, params)[-1]


def chain_windings(angles, params):
    """Accumulated winding angle at each bead, walked along the chain.

    phi_k is the continuous argument of X_k picked up by following the
    anchor -> bead 1 -> ... -> bead k polyline, with the anchor at
    argument 0. For L = 0 the walk starts at bead 1's principal
    argument. Raises ValueError when a bead sits too close to the
    origin for the argument to mean anything.
    """
    pos = bead_positions(angles, params)
    eps = params.origin_eps
    if np.any(np.abs(pos) <= eps):
        raise ValueError("initial configuration has a bead on the origin")
    if params.L > 0.0:
        prev = complex(params.L, 0.0)
        base = 0.0
    else:
        prev = pos[0]
        base = math.atan2(prev.imag, prev.real)
    inc = np.empty(params.n)
    inc[0] = base if params.L == 0.0 else _principal_arg(pos[0], prev)
    for k in range(1, params.n):
        inc[k] = _principal_arg(pos[k], pos[k - 1])
    return np.cumsum(inc)


def _principal_arg(nxt, prev):
    # arg(nxt/prev) in (-pi, pi] without forming the quotient
    x = nxt.real * prev.real + nxt.imag * prev.imag
    y = nxt.imag * prev.real - nxt.real * prev.imag
    return math.atan2(y, x)


def initial_winding(angles, params):
    """Total winding angle phi_n(0) of the free end."""
    return float(chain_windings(angles, params)[-1])


def realize_angles(config, params, rng=None):
    """Concrete angle vector for a configuration.

    Uniform configurations consume `rng`; the rest are deterministic.
    Every produced vector is validated non-winding (|phi_n(0)| < 2*pi)
    and origin-clear.
    """
    if config.kind == KIND_STRETCHED:
        return np.zeros(params.n)
    if config.kind == KIND_EXPLICIT:
        arr = np.asarray(config.angles, dtype=float)
        if arr.shape != (params.n,):
            raise ValueError(
                f"explicit config has {arr.size} angles, params want {params.n}"
            )
        if not abs(initial_winding(arr, params)) < TWO_PI:
            raise ValueError("explicit configuration is already winding")
        return arr.copy()
    if config.kind == KIND_UNIFORM:
        if rng is None:
            raise ValueError("uniform configuration needs an rng")
        bound = TWO_PI - config.eps_cfg
        while True:
            arr = rng.uniform(0.0, TWO_PI, size=params.n)
            try:
                phi0 = initial_winding(arr, params)
            except ValueError:
                continue
            if abs(phi0) < bound:
                return arr
    if config.kind == KIND_BOUNDARY_LAYER:
        from . import sde

        return np.asarray(
            sde.boundary_layer_config(config.phi0, params).angles, dtype=float
        )
    raise ValueError(f"unknown configuration kind {config.kind!r}")


@dataclass(frozen=True)
class InitialConstant:
    c_n: complex
    c_tilde: complex


def initial_constant(config, params):
    """Mean initial-configuration constant c_n and c~_n = c_n/sqrt(n).

    Stretched gives exactly n, uniform random averages to 0, and a
    deterministic configuration contributes sum_k exp(i*theta_k/sqrt(2D))
    (its own value; no ensemble to average over).
    """
    n = params.n
    if config.kind == KIND_STRETCHED:
        c = complex(n, 0.0)
    elif config.kind == KIND_UNIFORM:
        c = 0j
    elif config.kind in (KIND_EXPLICIT, KIND_BOUNDARY_LAYER):
        arr = realize_angles(config, params)
        root = math.sqrt(2.0 * params.D) if params.D > 0.0 else 1.0
        c = complex(np.sum(np.exp(1j * arr / root)))
    else:
        raise ValueError(f"unknown configuration kind {config.kind!r}")
    return InitialConstant(c_n=c, c_tilde=c / math.sqrt(n))


def mean_free_end(t, c_n, l_tilde):
    """E[X_n] at scaled time t, in rod-length units: l~ + c_n*exp(-t/2)."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    return l_tilde + c_n * math.exp(-0.5 * t)
