import numpy as np
from hypothesis import strategies as st

from cact.errors import CactError
from cact.signal_info import make_ci
from cact.verify import random_scenario, random_similarity

seeds = st.integers(0, 2**32 - 1)


def _scenario(seed, max_signals=4):
    rng = np.random.default_rng(seed)
    while True:
        try:
            return random_scenario(rng, max_signals=max_signals)
        except CactError:
            continue


scenarios = seeds.map(_scenario)
small_scenarios = seeds.map(lambda s: _scenario(s, 3))


@st.composite
def similar_pairs(draw, max_signals=5):
    """(more similar, less similar) state-1 joints with equal marginals."""
    rng = np.random.default_rng(draw(seeds))
    n = draw(st.integers(2, max_signals))
    m = rng.dirichlet(np.ones(n))
    jhat, _ = random_similarity(rng, make_ci(m), draw(st.integers(0, n)))
    j, moves = random_similarity(rng, jhat, draw(st.integers(1, n + 1)))
    return j, jhat, moves


def _in_environment(env, accept=None):
    from cact.verify import scenario_in

    return seeds.map(lambda s: scenario_in(np.random.default_rng(s), env, accept, max_signals=4))


def encouraging():
    from cact.population import Environment

    return _in_environment(Environment.ENCOURAGEMENT)


def discouraging(accept=None):
    from cact.population import Environment

    return _in_environment(Environment.DISCOURAGEMENT, accept)
