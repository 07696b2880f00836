"""Random admissible models for property tests."""

import numpy as np
from hypothesis import strategies as st

from treeising.model import MeanParamIsing, alpha_bounds
from treeising.tree import random_tree


def random_model(rng, d, q_lo=0.02, q_hi=0.98, common_q=None, positive=False, shrink=0.9, root=None):
    """Tree, means and correlations drawn at random; correlations stay a fraction ``shrink`` inside their interval."""
    t = random_tree(d, rng)
    if common_q is not None:
        q = np.full(d, float(common_q))
    else:
        q = rng.uniform(q_lo, q_hi, size=d)
    alpha = np.empty(len(t.edges))
    for i, (u, v) in enumerate(t.edges):
        lo, hi = alpha_bounds(q[u], q[v])
        if positive:
            lo = 0.0
        alpha[i] = rng.uniform(lo * shrink, hi * shrink)
        if positive and alpha[i] <= 0:
            alpha[i] = 0.5 * hi * shrink
    r = int(rng.integers(d)) if root is None else root
    return MeanParamIsing.on(t, q, alpha, root=r)


@st.composite
def models(draw, min_d=1, max_d=8):
    d = draw(st.integers(min_d, max_d))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_model(np.random.default_rng(seed), d)


def study_tree_edges():
    return [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]
