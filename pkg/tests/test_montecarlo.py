import math

import numpy as np
import pytest

from polywind import analytic, model, montecarlo, sde, streams
from polywind.montecarlo import EstimationError, McConfig


class TestStreams:
    def test_replicate_stream_is_deterministic(self):
        a = streams.replicate_stream(3, streams.TAG_WINDING, 1, 2)
        b = streams.replicate_stream(3, streams.TAG_WINDING, 1, 2)
        assert np.array_equal(a.standard_normal(16), b.standard_normal(16))

    @pytest.mark.parametrize(
        "key", [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    )
    def test_any_coordinate_changes_the_stream(self, key):
        base = streams.replicate_stream(0, 0, 0, 0).standard_normal(16)
        other = streams.replicate_stream(*key).standard_normal(16)
        assert not np.array_equal(base, other)

    def test_experiment_stream_is_row_zero(self):
        a = streams.experiment_stream(9, streams.TAG_LAPLACE)
        b = streams.replicate_stream(9, streams.TAG_LAPLACE, 0, 0)
        assert np.array_equal(a.standard_normal(8), b.standard_normal(8))


class TestMcConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(replicates=0),
            dict(replicates=2.5),
            dict(replicates=10, dt=0.0),
            dict(replicates=10, dt=0.2, t_max=0.1),
            dict(replicates=10, seed=-1),
            dict(replicates=10, max_workers_hint=0),
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            McConfig(**kw)

    def test_defaults(self):
        mc = McConfig(replicates=10)
        assert mc.dt == 0.01 and mc.seed == 0 and mc.max_workers_hint == 1


class TestEstimators:
    params = model.PolymerParams(n=5, D=5.0, L=0.3, l0=0.25)

    def test_seed_determinism(self):
        mc = McConfig(replicates=40, dt=0.01, t_max=300.0, seed=13)
        a = montecarlo.estimate_mrt(self.params, model.stretched(), mc)
        b = montecarlo.estimate_mrt(self.params, model.stretched(), mc)
        assert a == b
        assert a.n_used == 40 and a.mean > 0

    def test_worker_hint_invariance(self):
        mc1 = McConfig(replicates=24, dt=0.01, t_max=300.0, seed=5,
                       max_workers_hint=1)
        mc4 = McConfig(replicates=24, dt=0.01, t_max=300.0, seed=5,
                       max_workers_hint=4)
        a = montecarlo.estimate_mrt(self.params, model.stretched(), mc1)
        b = montecarlo.estimate_mrt(self.params, model.stretched(), mc4)
        assert a == b

    def test_stderr_shrinks_like_root_replicates(self):
        ses = []
        for reps in (100, 400, 1600):
            mc = McConfig(replicates=reps, dt=0.01, t_max=300.0, seed=2)
            ses.append(montecarlo.estimate_mrt(
                self.params, model.stretched(), mc).stderr)
        for lo, hi in zip(ses[1:], ses[:-1]):
            assert hi / lo == pytest.approx(2.0, rel=0.5)

    def test_timeouts_warn_and_are_counted(self):
        mc = McConfig(replicates=60, dt=0.01, t_max=1.0, seed=3)
        with pytest.warns(RuntimeWarning, match="timed out"):
            est = montecarlo.estimate_mrt(self.params, model.stretched(), mc)
        assert est.n_timeout > 0
        assert est.n_used + est.n_timeout + est.n_origin_fail == 60

    def test_all_timeouts_raise(self):
        frozen = model.PolymerParams(n=5, D=0.0, L=0.3, l0=0.25)
        mc = McConfig(replicates=5, dt=0.01, t_max=0.1, seed=0)
        with pytest.raises(EstimationError, match="all 5 replicates"):
            montecarlo.estimate_mrt(frozen, model.stretched(), mc)

    def test_mmrt_never_exceeds_mrt_on_shared_streams(self):
        mc = McConfig(replicates=50, dt=0.01, t_max=300.0, seed=8)
        s_end, t_end = montecarlo._collect(
            self.params, model.stretched(), mc, self.params.n, 0)
        s_any, t_any = montecarlo._collect(
            self.params, model.stretched(), mc, sde.eligible_kmin(self.params), 0)
        both = (s_end == 0) & (s_any == 0)
        assert both.mean() > 0.9
        assert np.all(t_any[both] <= t_end[both] + 1e-12)

    def test_wound_start_is_an_immediate_hit(self, wound_interior):
        params, angles = wound_interior
        mc = McConfig(replicates=6, dt=0.01, t_max=0.5, seed=0)
        est = montecarlo.estimate_mmrt(params, model.explicit(angles), mc)
        assert est.mean == 0.0 and est.n_used == 6


class TestSweep:
    params = model.PolymerParams(n=5, D=5.0, L=0.3, l0=0.25)
    mc = McConfig(replicates=20, dt=0.01, t_max=300.0, seed=4)

    def test_infeasible_rows_are_flagged_not_skipped(self):
        rows = montecarlo.sweep(
            self.params, "n", [1, 2, 20], model.stretched(), self.mc)
        assert [r.value for r in rows] == [1.0, 2.0, 20.0]
        assert not rows[0].feasible and rows[0].estimate is None
        assert rows[0].note != ""
        assert rows[1].feasible and rows[1].estimate.n_used > 0
        assert rows[2].feasible

    def test_non_integer_n_is_flagged(self):
        rows = montecarlo.sweep(
            self.params, "n", [2.5], model.stretched(), self.mc)
        assert not rows[0].feasible
        assert "integer" in rows[0].note

    def test_phi0_axis_builds_layered_starts(self):
        params = model.PolymerParams(n=10, D=1.0, L=0.1, l0=0.2)
        rows = montecarlo.sweep(
            params, "phi0", [1.0, 6.5], model.stretched(), self.mc)
        assert rows[0].feasible and rows[0].estimate.n_used > 0
        assert not rows[1].feasible       # beyond the winding threshold

    def test_frozen_point_is_reported_feasible_with_note(self):
        mc = McConfig(replicates=3, dt=0.01, t_max=0.5, seed=0)
        rows = montecarlo.sweep(
            self.params, "D", [0.0], model.stretched(), mc)
        assert rows[0].feasible and rows[0].estimate is None
        assert "failed" in rows[0].note

    def test_validation(self):
        with pytest.raises(ValueError, match="axis"):
            montecarlo.sweep(self.params, "l0", [1], model.stretched(), self.mc)
        with pytest.raises(ValueError, match="estimator"):
            montecarlo.sweep(self.params, "n", [5], model.stretched(), self.mc,
                             estimator="median")


class TestLaplaceCheck:
    def test_zero_frequency_is_exact(self):
        mc = McConfig(replicates=500, dt=0.001, t_max=20.0, seed=1)
        chk = montecarlo.laplace_check(math.pi / 4, 0.0, mc)
        assert chk.empirical == 1.0 and chk.analytic == 1.0

    def test_matches_sech_at_moderate_frequency(self):
        mc = McConfig(replicates=4000, dt=0.001, t_max=20.0, seed=6)
        chk = montecarlo.laplace_check(math.pi / 4, 1.0, mc)
        assert chk.n_timeout == 0
        assert abs(chk.empirical - chk.analytic) < 4.0 * chk.stderr

    def test_censoring_is_counted(self):
        mc = McConfig(replicates=50, dt=0.01, t_max=0.05, seed=0)
        chk = montecarlo.laplace_check(10.0, 0.5, mc)
        assert chk.n_timeout == 50

    def test_determinism(self):
        mc = McConfig(replicates=300, dt=0.002, t_max=10.0, seed=17)
        assert montecarlo.laplace_check(1.0, 0.5, mc) \
            == montecarlo.laplace_check(1.0, 0.5, mc)

    def test_validation(self):
        mc = McConfig(replicates=10)
        with pytest.raises(ValueError):
            montecarlo.laplace_check(0.0, 1.0, mc)
        with pytest.raises(ValueError):
            montecarlo.laplace_check(1.0, -0.5, mc)


class TestExpFunctional:
    def test_validation(self):
        with pytest.raises(ValueError):
            montecarlo.exp_functional_inverse_moment(0.0, McConfig(replicates=5))

    def test_reproducible(self):
        mc = McConfig(replicates=200, dt=0.01, t_max=10.0, seed=3)
        a = montecarlo.exp_functional_inverse_moment(1.0, mc)
        b = montecarlo.exp_functional_inverse_moment(1.0, mc)
        assert a == b

    def test_matches_direct_reference(self):
        # independent one-shot reimplementation of the trapezoid estimator
        mc = McConfig(replicates=50, dt=0.05, t_max=10.0, seed=3)
        est = montecarlo.exp_functional_inverse_moment(1.0, mc)
        rng = streams.experiment_stream(3, streams.TAG_EXPFUNC)
        M = 20
        h = 1.0 / M
        beta = np.cumsum(rng.standard_normal((50, M)) * math.sqrt(h), axis=1)
        e = np.exp(2.0 * beta)
        area = h * (0.5 + e[:, :-1].sum(axis=1) + 0.5 * e[:, -1])
        assert est.mean == pytest.approx(float((1.0 / area).mean()), rel=1e-12)

    def test_matches_analytic_moment(self):
        mc = McConfig(replicates=12000, dt=0.002, t_max=10.0, seed=9)
        est, coarse = montecarlo.exp_functional_inverse_moment(
            1.0, mc, return_coarse=True)
        target = analytic.neg_moment_A(1.0)
        allowance = 2.0 * abs(est.mean - coarse)
        assert abs(est.mean - target) < 4.0 * est.stderr + allowance


class TestBmWinding:
    def test_validation(self):
        with pytest.raises(ValueError):
            montecarlo.bm_winding_times(0.0, 10, 0)
        with pytest.raises(ValueError):
            montecarlo.bm_winding_times(1.0, 0, 0)

    def test_determinism_and_shape(self):
        a = montecarlo.bm_winding_times(1.0, 50, seed=4)
        b = montecarlo.bm_winding_times(1.0, 50, seed=4)
        assert np.array_equal(a, b)
        assert a.size <= 50 and np.all(a > 0)

    def test_cap_drops_warn(self):
        with pytest.warns(RuntimeWarning, match="clock cap"):
            out = montecarlo.bm_winding_times(1.0, 40, seed=1, h_max=1.0)
        assert 0 < out.size < 40

    def test_full_turn_times_match_log_moment(self):
        # E[ln(T + 1/2)]/4 + ln(2)/4 for the 2*pi winding exit
        samples = montecarlo.bm_winding_times(2.0 * math.pi, 2500, seed=12)
        est = analytic.ou_hitting_expectation(samples)
        want = analytic.constants().Q_tilde / 4.0
        assert est == pytest.approx(want, abs=0.08)
