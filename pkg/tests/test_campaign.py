import numpy as np
import pytest

from indefbif import ContinuationConfig, MuSinDescriptor, SinDescriptor
from indefbif.campaign import BifurcationDiagram, CampaignConfig, SeedSpec, run_campaign
from indefbif.continuation import FromZero, Seeded, Switched, Trivial


@pytest.fixture(scope="module")
def sin1_diagram():
    cfg = CampaignConfig(
        descriptor=SinDescriptor(1),
        n_interior=999,
        continuation=ContinuationConfig(ds_init=0.1, ds_max=2.0,
                                        lambda_window=(-30.0, 13.0), max_steps=2500),
        seeds=tuple(SeedSpec(c, -21.0) for c in ("10", "01", "11")),
        probes=(-21.0, 5.0),
    )
    return run_campaign(cfg)


@pytest.fixture(scope="module")
def sin2_diagram():
    cfg = CampaignConfig(
        descriptor=SinDescriptor(2),
        n_interior=999,
        continuation=ContinuationConfig(ds_init=0.1, ds_max=2.0,
                                        lambda_window=(-70.0, 13.0), max_steps=3000),
        seeds=tuple(SeedSpec(c, -60.0) for c in ("001", "010", "100", "011", "101", "110", "111")),
        probes=(-60.0, 5.0),
    )
    return run_campaign(cfg)


class TestSin1Campaign:
    def test_structure(self, sin1_diagram):
        d = sin1_diagram
        assert not d.failures
        assert len(d.branches) == 3
        assert isinstance(d.branches[0].provenance, FromZero)
        assert all(isinstance(b.provenance, Switched) for b in d.branches[1:])
        assert len(d.components) == 1

    def test_trivial_branch_present(self, sin1_diagram):
        tb = sin1_diagram.trivial_branch
        assert isinstance(tb.provenance, Trivial)
        assert all(p.max_u == 0.0 for p in tb.points)
        # trivial morse jumps from 0 to 1 across sigma_1
        morse = {round(p.lam, 1): p.morse_index for p in tb.points}
        assert morse[5.0] == 0
        assert morse[12.0] == 1

    def test_events(self, sin1_diagram):
        folds = sin1_diagram.events_of_kind("fold")
        bps = sin1_diagram.events_of_kind("branch_point")
        assert any(abs(ev.lam - 12.1) <= 0.3 for _, ev in folds)
        assert any(abs(ev.lam - 10.1) <= 0.3 for _, ev in bps)

    def test_census_minus21(self, sin1_diagram):
        pts = sin1_diagram.census[-21.0]
        assert len(pts) == 3
        assert sorted((p.bump_code, p.morse_index) for p in pts) == [
            ("01", 1), ("10", 1), ("11", 2),
        ]

    def test_census_monotonicity(self, sin1_diagram):
        assert len(sin1_diagram.census[-21.0]) >= len(sin1_diagram.census[5.0])

    def test_census_dedup_metric(self, sin1_diagram):
        for pts in sin1_diagram.census.values():
            for i in range(len(pts)):
                for j in range(i + 1, len(pts)):
                    rel_u = np.max(np.abs(pts[i].u - pts[j].u)) / (1.0 + pts[i].max_u)
                    rel_p = abs(pts[i].uprime0 - pts[j].uprime0) / (1.0 + abs(pts[i].uprime0))
                    assert rel_u > 1e-3 or rel_p > 1e-3

    def test_switched_codes(self, sin1_diagram):
        deep_codes = set()
        for br in sin1_diagram.branches[1:]:
            deep = min(br.points, key=lambda p: p.lam)
            deep_codes.add(deep.bump_code)
        assert deep_codes == {"10", "01"}


class TestSin2Campaign:
    def test_four_components(self, sin2_diagram):
        d = sin2_diagram
        assert not d.failures
        assert len(d.branches) == 4
        assert len(d.components) == 4

    def test_primary_has_no_events_and_code_010(self, sin2_diagram):
        primary = sin2_diagram.branches[0]
        assert isinstance(primary.provenance, FromZero)
        assert primary.events == []
        deep = min(primary.points, key=lambda p: p.lam)
        assert deep.bump_code == "010"

    def test_census_has_seven(self, sin2_diagram):
        pts = sin2_diagram.census[-60.0]
        codes = sorted(p.bump_code for p in pts)
        assert codes == ["001", "010", "011", "100", "101", "110", "111"]
        for p in pts:
            assert p.morse_index == sum(int(c) for c in p.bump_code)

    def test_fold_transitions(self, sin2_diagram):
        # each seeded fold connects the expected pair of types
        expected = {("100", "110"), ("101", "111"), ("001", "011")}
        got = set()
        for br in sin2_diagram.branches[1:]:
            lams = br.lam_values()
            ends = [br.points[0], br.points[-1]]
            pair = tuple(sorted(p.bump_code for p in ends))
            got.add(pair)
        assert got == {tuple(sorted(p)) for p in expected}

    def test_seeds_were_deduplicated(self, sin2_diagram):
        seeded = [b for b in sin2_diagram.branches if isinstance(b.provenance, Seeded)]
        assert len(seeded) == 3  # one per fold, the other four codes were represented


class TestMuFamily:
    def test_mu45_wiring(self):
        cfg = CampaignConfig(
            descriptor=MuSinDescriptor(4.5),
            n_interior=999,
            continuation=ContinuationConfig(ds_init=0.1, ds_max=2.0,
                                            lambda_window=(-40.0, 13.0), max_steps=3000),
            seeds=tuple(SeedSpec(c, -30.0) for c in ("001", "010", "100", "011", "101", "110", "111")),
            probes=(-30.0, 0.0),
        )
        d = run_campaign(cfg)
        assert len(d.components) == 2
        assert len(d.census[0.0]) == 3
        assert len(d.census[-30.0]) == 7
        # the two folds meet at a branch point near -23.27
        bps = [ev.lam for _, ev in d.events_of_kind("branch_point")]
        assert any(abs(v + 23.27) < 0.2 for v in bps)
