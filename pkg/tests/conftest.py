import math

import numpy as np
import pytest

from polywind import model


@pytest.fixture
def small_params():
    return model.PolymerParams(n=6, D=1.0, L=0.3, l0=0.25)


def circle_chain(n_ccw, n_cw=0, R=0.5, segs=20):
    """Rod angles walking chords of a circle of radius R about the origin.

    n_ccw chords counterclockwise, then n_cw back clockwise. The anchor
    must sit on the circle, so pair with params L = R. Returns
    (angles, l0) with l0 the exact chord length.
    """
    beta = 2.0 * math.pi / segs
    l0 = 2.0 * R * math.sin(0.5 * beta)
    bead_args = [0.0]
    for k in range(n_ccw):
        bead_args.append(bead_args[-1] + beta)
    for k in range(n_cw):
        bead_args.append(bead_args[-1] - beta)
    pts = R * np.exp(1j * np.asarray(bead_args))
    return np.angle(np.diff(pts)), l0


@pytest.fixture
def wound_interior():
    """Chain whose bead 25 has wound 2.5*pi but whose free end sits at 1.5*pi."""
    angles, l0 = circle_chain(25, 10)
    params = model.PolymerParams(n=35, D=1.0, L=0.5, l0=l0)
    return params, angles
