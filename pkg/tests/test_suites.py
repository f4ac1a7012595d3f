"""Tests for the acceptance suites."""

import pytest

from app.services.haarconv import build_measured_map, counting_system
from app.services.steinberg import pair_groupoid
from app.services.suites import SUITE_IDS, SuiteResult, _mutations, run_suites


class TestRunSuites:
    @pytest.mark.parametrize("suite_id", SUITE_IDS)
    def test_suite_passes_at_small_size(self, suite_id):
        (result,) = run_suites(max_size=2, only=[suite_id])
        assert result.suite_id == suite_id
        assert result.cases > 0
        assert result.passed, result.failures[:3]

    def test_seed_makes_runs_repeatable(self):
        first = run_suites(max_size=2, seed=7, only=["REL-2", "CLA-2"])
        second = run_suites(max_size=2, seed=7, only=["REL-2", "CLA-2"])
        assert [r.to_dict() for r in first] == [r.to_dict() for r in second]

    def test_timing_only_on_request(self):
        (result,) = run_suites(max_size=1, only=["STO-1"])
        assert "elapsed_seconds" not in result.to_dict()
        assert result.to_dict(timing=True)["elapsed_seconds"] >= 0

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            run_suites(max_size=1, only=["XYZ-9"])


class TestSuiteResult:
    def test_guarded_accepts_a_check_witness(self):
        result = SuiteResult("STE-1")
        result.guarded(lambda: False, check="local_bisection")
        assert result.cases == 1
        assert result.failures == [{"check": "local_bisection"}]


class TestHaarMutations:
    def test_every_entry_of_every_image_is_perturbed(self):
        G = pair_groupoid([1, 2])
        counting = counting_system(G)
        T = build_measured_map({a: a for a in G.elements}, {a: 1 for a in G.elements}, counting, counting)
        witnesses = [witness for witness, _ in _mutations(T)]
        # Per indicator: one non-zero entry (doubled, zeroed) and three empty ones (filled, moved to).
        assert len(witnesses) == 4 * (2 + 3 * 2)
        assert {"moved": "(1, 2)", "to": "(2, 2)"} in witnesses
