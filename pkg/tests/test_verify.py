import pytest

from cact.errors import UnknownName
from cact.verify import SUITES, run_suite

SIZES = {"prop-three": 4}


@pytest.mark.parametrize("suite", SUITES)
def test_small_runs_pass(suite):
    rep = run_suite(suite, SIZES.get(suite, 30), seed=1)
    assert rep.ok, rep.counterexamples
    assert rep.passed + rep.skipped == rep.instances
    assert rep.failed == 0


def test_runs_are_deterministic():
    a = run_suite("thm2", 20, seed=3)
    b = run_suite("thm2", 20, seed=3, jobs=2)
    assert a.to_json() == b.to_json()


def test_unknown_suite():
    with pytest.raises(UnknownName):
        run_suite("thm9", 1)
