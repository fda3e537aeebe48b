# Parameter points and helpers shared by the tests
from functools import lru_cache

import pytest

from iot_contracts import *

# Strictly concave point : kq = 0.25 > μ²/4, both stages have a unique maximum
CONCAVE = ModelParams(alpha=1.0, q=0.5, k=0.5, theta=0.2, lambda_=0.5, mu=0.5)

# Decision vector of the worked demand and profit examples
EXAMPLE_DECISIONS = Decisions(p=0.25, w=0.1, h=0.1, s=0.1)


def assert_close(actual, expected, rel=1e-6, abs=1e-9) :
    """Compare scalars or dicts of scalars """
    if isinstance(expected, dict) :
        for key, val in expected.items() :
            assert actual[key] == pytest.approx(val, rel=rel, abs=abs), key
    else :
        assert actual == pytest.approx(expected, rel=rel, abs=abs)


def decisions_of(outcome: EquilibriumOutcome) :
    return outcome.decisions.values()


@lru_cache()
def oracle_outcome(code, params: ModelParams, certify=False) :
    """Oracle solves are the slow part of the suite : share them between tests """
    return stackelberg_solve(SCENARIOS[code], params, SolveOptions(certify=certify))


def platform_decisions(outcome: EquilibriumOutcome) :
    d = outcome.decisions
    return dict(s=d.s) if d.w is None else dict(w=d.w, s=d.s)


def assert_follower_optimal(outcome: EquilibriumOutcome, abs=1e-10) :
    """Re-solving the manufacturer stage at the platform decisions gives back (p, h) """
    p_, h_, _ = manufacturer_best_response(outcome.scenario, outcome.params, platform_decisions(outcome))
    assert p_ == pytest.approx(outcome.decisions.p, abs=abs)
    assert h_ == pytest.approx(outcome.decisions.h, abs=abs)


def well_posed_rational(params: ModelParams, margin=1e-3) :
    """Inside the printed domain, with a unique maximum at both stages, for both contracts """
    return all(not domain_check(params, sc) and is_well_posed(sc, params, margin) for sc in (UN, RN))
