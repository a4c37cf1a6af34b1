import math

import numpy as np
import pytest

from indefbif import (
    ContinuationConfig,
    NewtonConfig,
    SinDescriptor,
    arclength_step,
    build_grid,
    detect_events,
    extended_tangent,
    newton_solve,
    sample_weight,
    seed_multibump,
    trace_branch,
)
from indefbif.continuation import (
    FromZero,
    Seeded,
    branch_switch,
    primary_branch_start,
    scaled_distance,
)
from indefbif.nonlinear import SolutionPoint, residual

PI = math.pi


def trivial_point(lam, grid):
    return SolutionPoint(lam=lam, u=np.zeros(grid.n_interior), uprime0=0.0, residual_norm=0.0)


@pytest.fixture(scope="module")
def sin1_branch(sin1_999, grid999, newton_cfg):
    start, takeoff = primary_branch_start(sin1_999, grid999, s0=0.005)
    ccfg = ContinuationConfig(ds_init=0.005, ds_max=2.0, lambda_window=(-30.0, 13.0), max_steps=2000)
    return trace_branch(
        start, sin1_999, grid999, ccfg, newton_cfg,
        initial_tangent=takeoff, provenance=FromZero(PI**2), ds_start=0.005,
    ), ccfg


class TestTangent:
    def test_trivial_branch_tangent_is_lambda_direction(self, sin1_999, grid999):
        pt = trivial_point(5.0, grid999)
        prev = np.concatenate([np.zeros(999), [1.0]])
        t = extended_tangent(pt, prev, sin1_999, grid999)
        assert abs(t[-1] - 1.0) < 1e-12
        assert np.max(np.abs(t[:-1])) < 1e-12
        t_down = extended_tangent(pt, -prev, sin1_999, grid999)
        assert abs(t_down[-1] + 1.0) < 1e-12

    def test_unit_normalization(self, sin1_999, grid999, newton_cfg):
        pt = newton_solve(-21.0, seed_multibump("11", -21.0, sin1_999, grid999),
                          sin1_999, grid999, newton_cfg)
        prev = np.concatenate([np.zeros(999), [1.0]])
        t = extended_tangent(pt, prev, sin1_999, grid999)
        us = 1.0 / 999
        assert us * np.dot(t[:-1], t[:-1]) + t[-1] ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_fold_tangent_has_zero_lambda_component(self, sin1_branch, sin1_999, grid999):
        branch, _ = sin1_branch
        fold = [e for e in branch.events if e.kind == "fold"][0]
        pt = SolutionPoint(lam=fold.lam, u=fold.u, uprime0=fold.uprime0, residual_norm=0.0)
        prev = branch.tangents[fold.step_index]
        t = extended_tangent(pt, prev, sin1_999, grid999)
        assert abs(t[-1]) < 2e-3  # dlam vanishes at the fold up to refinement width


class TestArclengthStep:
    def test_trivial_step(self, sin1_999, grid999, newton_cfg):
        pt = trivial_point(5.0, grid999)
        t = np.concatenate([np.zeros(999), [1.0]])
        cfg = ContinuationConfig()
        p1, iters = arclength_step(pt, t, 0.1, sin1_999, grid999, cfg, newton_cfg)
        assert p1.lam == pytest.approx(5.1, abs=1e-10)
        assert p1.max_u < 1e-12

    def test_restart_returns_to_start(self, sin1_999, grid999, newton_cfg):
        # +ds then -ds comes back to the same corrector fixed point
        pt = newton_solve(-21.0, seed_multibump("11", -21.0, sin1_999, grid999),
                          sin1_999, grid999, newton_cfg)
        cfg = ContinuationConfig()
        prev = np.concatenate([np.zeros(999), [1.0]])
        t0 = extended_tangent(pt, prev, sin1_999, grid999)
        p1, _ = arclength_step(pt, t0, 0.5, sin1_999, grid999, cfg, newton_cfg)
        t1 = extended_tangent(p1, t0, sin1_999, grid999)
        p2, _ = arclength_step(p1, t1, -0.5, sin1_999, grid999, cfg, newton_cfg)
        assert abs(p2.lam - pt.lam) < 1e-7
        assert np.max(np.abs(p2.u - pt.u)) < 1e-6

    def test_orthogonality_constraint_on_accepted_steps(self, sin1_branch, grid999, newton_cfg):
        branch, _ = sin1_branch
        us = 1.0 / grid999.n_interior
        for k in range(1, min(len(branch.points), 40)):
            p_prev, p = branch.points[k - 1], branch.points[k]
            t = branch.tangents[k - 1]
            ds = branch.step_sizes[k - 1]
            g = us * np.dot(p.u - (p_prev.u + ds * t[:-1]), t[:-1]) + (
                p.lam - (p_prev.lam + ds * t[-1])
            ) * t[-1]
            tol = newton_cfg.effective_tol(grid999.h, p.max_u)
            assert abs(g) <= 10.0 * tol

    def test_arclength_normalization_invariant(self, sin1_branch, grid999):
        branch, _ = sin1_branch
        us = 1.0 / grid999.n_interior
        for k in range(1, len(branch.points)):
            p_prev, p = branch.points[k - 1], branch.points[k]
            t = branch.tangents[k - 1]
            ds = branch.step_sizes[k - 1]
            proj = us * np.dot(p.u - p_prev.u, t[:-1]) + (p.lam - p_prev.lam) * t[-1]
            assert abs(proj - ds) <= 0.1 * ds


class TestTraceAndEvents:
    def test_primary_branch_events(self, sin1_branch):
        branch, _ = sin1_branch
        folds = [e for e in branch.events if e.kind == "fold"]
        bps = [e for e in branch.events if e.kind == "branch_point"]
        assert len(folds) == 1 and len(bps) == 1
        assert folds[0].lam == pytest.approx(12.1, abs=0.3)
        assert bps[0].lam == pytest.approx(10.1, abs=0.3)

    def test_fold_morse_change_is_one(self, sin1_branch):
        branch, _ = sin1_branch
        fold = [e for e in branch.events if e.kind == "fold"][0]
        assert abs(fold.count_after - fold.count_before) == 1

    def test_trivial_branch_has_no_events(self, sin1_999, grid999, newton_cfg):
        p0 = trivial_point(5.0, grid999)
        t0 = np.concatenate([np.zeros(999), [1.0]])
        cfg = ContinuationConfig()
        p1, _ = arclength_step(p0, t0, 0.5, sin1_999, grid999, cfg, newton_cfg)
        t1 = extended_tangent(p1, t0, sin1_999, grid999)
        assert detect_events(p0, t0, p1, t1, sin1_999, grid999) == []

    def test_ambiguous_event_raises(self, sin1_branch, sin1_999, grid999, newton_cfg):
        # a segment spanning both the fold and the branch point shows a count
        # jump of two: the detector refuses to guess
        from indefbif.continuation import AmbiguousEventError

        branch, _ = sin1_branch
        fold = [e for e in branch.events if e.kind == "fold"][0]
        bp = [e for e in branch.events if e.kind == "branch_point"][0]
        k0 = fold.step_index - 1
        k1 = bp.step_index + 1
        with pytest.raises(AmbiguousEventError):
            detect_events(
                branch.points[k0], branch.tangents[k0],
                branch.points[k1], branch.tangents[k1],
                sin1_999, grid999,
            )

    def test_event_reproducibility_under_ds_halving(self, sin1_999, grid999, newton_cfg):
        locations = []
        for ds in (0.2, 0.1):
            start, takeoff = primary_branch_start(sin1_999, grid999, s0=0.005)
            cfg = ContinuationConfig(ds_init=ds, ds_max=ds, lambda_window=(5.0, 13.0), max_steps=800)
            br = trace_branch(start, sin1_999, grid999, cfg, newton_cfg,
                              initial_tangent=takeoff, provenance=FromZero(PI**2), ds_start=0.005)
            evs = sorted((e.kind, e.lam) for e in br.events)
            locations.append(evs)
        assert len(locations[0]) == len(locations[1]) >= 2
        for (k0, l0), (k1, l1) in zip(*locations):
            assert k0 == k1
            assert abs(l0 - l1) < 1e-3

    def test_seeded_fold_closure_from_both_ends(self, sin2_999, grid999, newton_cfg):
        # the two traversals of a fold agree where they overlap: compare the
        # fold-event locations found from each end
        lam0 = -30.0
        pt = newton_solve(lam0, seed_multibump("001", lam0, sin2_999, grid999),
                          sin2_999, grid999, newton_cfg)
        cfg = ContinuationConfig(ds_init=0.1, ds_max=2.0, lambda_window=(-40.0, 13.0), max_steps=1500)
        up = trace_branch(pt, sin2_999, grid999, cfg, newton_cfg,
                          prev_tangent=np.concatenate([np.zeros(999), [1.0]]),
                          provenance=Seeded("001", lam0, +1))
        folds = [e for e in up.events if e.kind == "fold"]
        assert len(folds) == 1
        # restart from the far end of the up-trace (last in-window point),
        # coming back
        far = up.points[-2]
        back = trace_branch(far, sin2_999, grid999, cfg, newton_cfg,
                            prev_tangent=-up.tangents[-2],
                            provenance=Seeded("001", lam0, -1))
        folds_back = [e for e in back.events if e.kind == "fold"]
        assert len(folds_back) == 1
        assert folds[0].lam == pytest.approx(folds_back[0].lam, abs=1e-3)
        assert folds[0].uprime0 == pytest.approx(folds_back[0].uprime0, rel=1e-3)


class TestBranchSwitch:
    def test_switch_produces_reflected_pair(self, sin1_branch, sin1_999, grid999, newton_cfg):
        branch, ccfg = sin1_branch
        ev = [e for e in branch.events if e.kind == "branch_point"][0]
        pa, pb = branch_switch(ev, sin1_999, grid999, ccfg, newton_cfg)
        # equivariance: the two bifurcating solutions are mutual reflections
        assert np.max(np.abs(pa.u - pb.u[::-1])) <= 1e-6 * max(1.0, pa.max_u)
        r = residual(pa.lam, pb.u[::-1], sin1_999, grid999)
        assert np.max(np.abs(r)) <= 2.0 * newton_cfg.effective_tol(grid999.h, pa.max_u)

    def test_switch_rejects_fold_events(self, sin1_branch, sin1_999, grid999, newton_cfg):
        branch, ccfg = sin1_branch
        fold = [e for e in branch.events if e.kind == "fold"][0]
        with pytest.raises(ValueError):
            branch_switch(fold, sin1_999, grid999, ccfg, newton_cfg)


class TestSeedMultibump:
    def test_zero_code_gives_zero_vector(self, sin1_999, grid999):
        u0 = seed_multibump("00", -21.0, sin1_999, grid999)
        assert np.all(u0 == 0.0)
        pt = newton_solve(-21.0, u0, sin1_999, grid999)
        assert pt.max_u == 0.0

    def test_code_length_check(self, sin1_999, grid999):
        with pytest.raises(ValueError):
            seed_multibump("101", -21.0, sin1_999, grid999)

    def test_positive_lambda_rejected(self, sin1_999, grid999):
        with pytest.raises(ValueError):
            seed_multibump("11", 5.0, sin1_999, grid999)

    def test_seeded_101_classifies_101(self, grid999, newton_cfg):
        from indefbif import classify_type, sample_weight

        w = sample_weight(SinDescriptor(2), grid999)
        pt = newton_solve(-40.0, seed_multibump("101", -40.0, w, grid999), w, grid999, newton_cfg)
        assert str(classify_type(pt, w, grid999)) == "101"


class TestOnset:
    def test_start_point_amplitude(self, sin1_999, grid999):
        pt, tan = primary_branch_start(sin1_999, grid999, s0=0.005)
        assert pt.max_u == pytest.approx(0.005, rel=0.05)
        assert pt.lam == pytest.approx(PI**2, abs=0.05)

    def test_local_shape_is_first_eigenfunction(self, sin1_999, grid999):
        # bifurcating direction: u/||u|| stays within 5% of sin(pi x)
        psi = np.sin(PI * grid999.nodes)
        for s0 in (2e-3, 5e-3, 1e-2):
            pt, _ = primary_branch_start(sin1_999, grid999, s0=s0)
            assert np.max(np.abs(pt.u / pt.max_u - psi)) <= 0.05

    def test_subcritical_onset_d1_zero(self, sin2_999, grid999):
        # D1 = 0, D2 < 0: the branch leaves pi^2 toward smaller lam
        pt, tan = primary_branch_start(sin2_999, grid999, s0=0.05)
        assert pt.lam < PI**2
        assert pt.max_u == pytest.approx(0.05, rel=0.1)
