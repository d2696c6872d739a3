import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polywind import model
from conftest import circle_chain

TWO_PI = 2.0 * math.pi


class TestPolymerParams:
    def test_valid(self):
        p = model.PolymerParams(n=4, D=2.0, L=0.5, l0=0.25)
        assert p.n == 4 and p.origin_eps == pytest.approx(0.25e-9)

    def test_n_coerced_to_int(self):
        p = model.PolymerParams(n=4.0, D=1.0, L=0.0, l0=1.0)
        assert isinstance(p.n, int)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(n=0, D=1.0, L=0.0, l0=1.0),
            dict(n=2.5, D=1.0, L=0.0, l0=1.0),
            dict(n=4, D=-1.0, L=0.0, l0=1.0),
            dict(n=4, D=math.nan, L=0.0, l0=1.0),
            dict(n=4, D=1.0, L=-0.1, l0=1.0),
            dict(n=4, D=1.0, L=0.0, l0=0.0),
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            model.PolymerParams(**kw)

    def test_infeasible_when_chain_cannot_reach_around(self):
        with pytest.raises(model.InfeasibleModelError):
            model.PolymerParams(n=3, D=1.0, L=1.0, l0=0.25)
        # boundary case n*l0 == L is still infeasible
        with pytest.raises(model.InfeasibleModelError):
            model.PolymerParams(n=4, D=1.0, L=1.0, l0=0.25)

    def test_infeasible_is_a_value_error(self):
        assert issubclass(model.InfeasibleModelError, ValueError)

    def test_d_zero_admitted(self):
        p = model.PolymerParams(n=4, D=0.0, L=0.0, l0=1.0)
        assert model.rescale(p).time_scale == 0.0


class TestRescale:
    def test_fields(self, small_params):
        sc = model.rescale(small_params)
        assert sc.l_tilde == pytest.approx(0.3 / 0.25)
        assert sc.time_scale == pytest.approx(2.0)

    def test_roundtrip(self, small_params):
        sc = model.rescale(small_params)
        for t in (0.0, 0.37, 12.5):
            assert sc.to_physical(sc.to_scaled(t)) == pytest.approx(t)

    def test_frozen_chain_has_no_clock(self):
        sc = model.rescale(model.PolymerParams(n=2, D=0.0, L=0.0, l0=1.0))
        assert sc.to_scaled(3.0) == 0.0
        with pytest.raises(ZeroDivisionError):
            sc.to_physical(1.0)


class TestGeometry:
    def test_stretched_positions(self, small_params):
        pos = model.bead_positions(np.zeros(6), small_params)
        assert np.allclose(pos.real, 0.3 + 0.25 * np.arange(1, 7))
        assert np.allclose(pos.imag, 0.0)

    def test_wrong_angle_count(self, small_params):
        with pytest.raises(ValueError):
            model.bead_positions(np.zeros(5), small_params)

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=30))
    @settings(max_examples=50, deadline=None)
    def test_rod_lengths_invariant(self, angles):
        angles = np.asarray(angles)
        n = angles.size
        params = model.PolymerParams(n=n, D=1.0, L=0.5, l0=0.75)
        pos = np.concatenate(
            [[complex(params.L, 0.0)], model.bead_positions(angles, params)]
        )
        assert np.allclose(np.abs(np.diff(pos)), params.l0)

    def test_free_end_matches_last_bead(self, small_params):
        rng = np.random.default_rng(3)
        ang = rng.uniform(0, TWO_PI, 6)
        assert model.free_end(ang, small_params) == model.bead_positions(
            ang, small_params
        )[-1]


class TestChainWindings:
    def test_stretched_is_zero(self, small_params):
        assert np.allclose(model.chain_windings(np.zeros(6), small_params), 0.0)

    def test_quarter_circle_chords(self):
        angles, l0 = circle_chain(5)
        params = model.PolymerParams(n=5, D=1.0, L=0.5, l0=l0)
        w = model.chain_windings(angles, params)
        beta = TWO_PI / 20
        assert np.allclose(w, beta * np.arange(1, 6))

    def test_winding_negates_with_mirror(self):
        angles, l0 = circle_chain(7)
        params = model.PolymerParams(n=7, D=1.0, L=0.5, l0=l0)
        w = model.chain_windings(angles, params)
        assert np.allclose(model.chain_windings(-angles, params), -w)

    def test_bead_on_origin_rejected(self):
        params = model.PolymerParams(n=2, D=1.0, L=1.0, l0=1.0)
        with pytest.raises(ValueError):
            model.chain_windings(np.array([math.pi, 0.0]), params)

    def test_anchor_at_origin_uses_first_bead_argument(self):
        params = model.PolymerParams(n=2, D=1.0, L=0.0, l0=1.0)
        w = model.chain_windings(np.array([math.pi / 4, math.pi / 4]), params)
        assert w[0] == pytest.approx(math.pi / 4)
        assert w[1] == pytest.approx(math.pi / 4)

    def test_initial_winding_is_last_entry(self, wound_interior):
        params, angles = wound_interior
        w = model.chain_windings(angles, params)
        assert model.initial_winding(angles, params) == pytest.approx(w[-1])
        assert w.max() >= TWO_PI
        assert abs(w[-1]) < TWO_PI


class TestConfigs:
    def test_stretched_realizes_zeros(self, small_params):
        out = model.realize_angles(model.stretched(), small_params)
        assert np.array_equal(out, np.zeros(6))

    def test_explicit_roundtrip(self, small_params):
        ang = np.linspace(-1, 1, 6)
        cfg = model.explicit(ang)
        out = model.realize_angles(cfg, small_params)
        assert np.allclose(out, ang)
        out[0] = 99.0  # returned array is a copy
        assert model.realize_angles(cfg, small_params)[0] == pytest.approx(-1.0)

    @pytest.mark.parametrize("bad", [[], [[0.0, 1.0]], [0.0, math.inf]])
    def test_explicit_rejects(self, bad):
        with pytest.raises(ValueError):
            model.explicit(bad)

    def test_explicit_wrong_length(self, small_params):
        with pytest.raises(ValueError):
            model.realize_angles(model.explicit([0.0, 0.0]), small_params)

    def test_explicit_already_winding_rejected(self):
        angles, l0 = circle_chain(45)
        params = model.PolymerParams(n=45, D=1.0, L=0.5, l0=l0)
        with pytest.raises(ValueError, match="winding"):
            model.realize_angles(model.explicit(angles), params)

    def test_uniform_needs_rng(self, small_params):
        with pytest.raises(ValueError):
            model.realize_angles(model.uniform_random(), small_params)

    def test_uniform_margin_respected(self, small_params):
        rng = np.random.default_rng(11)
        cfg = model.uniform_random(eps_cfg=0.5)
        for _ in range(25):
            ang = model.realize_angles(cfg, small_params, rng)
            assert abs(model.initial_winding(ang, small_params)) < TWO_PI - 0.5

    @pytest.mark.parametrize("eps", [0.0, -1.0, TWO_PI])
    def test_uniform_eps_bounds(self, eps):
        with pytest.raises(ValueError):
            model.uniform_random(eps)

    @pytest.mark.parametrize("phi0", [TWO_PI, -TWO_PI, 7.0])
    def test_boundary_layer_bounds(self, phi0):
        with pytest.raises(ValueError):
            model.boundary_layer(phi0)

    def test_boundary_layer_realizes_target(self):
        params = model.PolymerParams(n=10, D=1.0, L=0.1, l0=0.2)
        ang = model.realize_angles(model.boundary_layer(math.pi), params)
        assert model.initial_winding(ang, params) == pytest.approx(
            math.pi, abs=1e-6
        )

    def test_unknown_kind(self, small_params):
        cfg = model.InitialConfig(kind="nope")
        with pytest.raises(ValueError):
            model.realize_angles(cfg, small_params)


class TestInitialConstant:
    def test_stretched(self, small_params):
        k = model.initial_constant(model.stretched(), small_params)
        assert k.c_n == 6 + 0j
        assert k.c_tilde == pytest.approx((6 + 0j) / math.sqrt(6))

    def test_uniform_averages_to_zero(self, small_params):
        assert model.initial_constant(model.uniform_random(), small_params).c_n == 0j

    def test_explicit_uses_scaled_angles(self):
        params = model.PolymerParams(n=3, D=2.0, L=0.0, l0=1.0)
        ang = np.array([0.4, -0.2, 1.1])
        k = model.initial_constant(model.explicit(ang), params)
        expect = np.sum(np.exp(1j * ang / math.sqrt(4.0)))
        assert k.c_n == pytest.approx(expect)

    def test_mean_free_end(self):
        c = 4 + 0j
        assert model.mean_free_end(0.0, c, 1.2) == pytest.approx(1.2 + 4.0)
        decayed = model.mean_free_end(2.0, c, 1.2)
        assert decayed == pytest.approx(1.2 + 4.0 * math.exp(-1.0))
        with pytest.raises(ValueError):
            model.mean_free_end(-0.1, c, 1.2)
