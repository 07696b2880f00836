import numpy as np
import pytest
from scipy import stats

from treeising.distribution import sum_pmf
from treeising.errors import InputError, NotSymmetricModel
from treeising.model import MeanParamIsing, all_states, correlation, joint_table, pair_pmf
from treeising.sampling import (
    RngStream,
    mc_confidence_intervals,
    monte_carlo_sum_pmf,
    sample_batch,
    sample_ising,
    sample_symmetric_batch,
)
from treeising.tree import binary_tree, build_tree, chain

N_BIG = 10**6


def study(q=0.01):
    return MeanParamIsing.on(binary_tree(), q, 0.7)


def corr_se(m, u, v, n):
    """Delta-method standard error of the sample Pearson correlation of (J_u, J_v)."""
    cells = np.array([[a, b, pair_pmf(m, (u, v), a, b)] for a in (0, 1) for b in (0, 1)]) if m.tree.has_edge(u, v) else None
    if cells is None:
        tab = joint_table(m)
        X = all_states(m.d)
        cells = np.array([[a, b, tab[(X[:, u] == a) & (X[:, v] == b)].sum()] for a in (0, 1) for b in (0, 1)])
    x, y, p = cells.T
    mx, my = p @ x, p @ y
    dx, dy = x - mx, y - my
    mu = lambda i, j: p @ (dx**i * dy**j)
    s20, s02, s11 = mu(2, 0), mu(0, 2), mu(1, 1)
    rho = s11 / np.sqrt(s20 * s02)
    var = (
        mu(2, 2) / (s20 * s02)
        + rho**2 / 4 * (mu(4, 0) / s20**2 + mu(0, 4) / s02**2 + 2 * mu(2, 2) / (s20 * s02))
        - rho * (mu(3, 1) / (s20**1.5 * s02**0.5) + mu(1, 3) / (s20**0.5 * s02**1.5))
    )
    return np.sqrt(var / n)


@pytest.fixture(scope="module")
def big_study_batch():
    return sample_batch(study(), N_BIG, RngStream(11)).by_vertex()


class TestDirectSampler:
    def test_determinism(self):
        a = sample_batch(study(), 500, RngStream(5, 3))
        b = sample_batch(study(), 500, RngStream(5, 3))
        assert np.array_equal(a.bits, b.bits)
        c = sample_batch(study(), 500, RngStream(5, 4))
        assert not np.array_equal(a.by_vertex(), c.by_vertex())

    def test_shapes(self):
        x = sample_ising(study(), 1)
        assert x.shape == (7,) and set(np.unique(x)) <= {0, 1}
        batch = sample_batch(study(), 10, 1)
        assert batch.by_vertex().shape == (10, 7)
        assert np.array_equal(batch.sums(), batch.by_vertex().sum(axis=1))

    def test_copy_limit(self):
        m = MeanParamIsing.on(chain(5), 0.5, 1 - 1e-9)
        x = sample_batch(m, 2000, 3).by_vertex()
        assert np.all(x == x[:, :1])

    def test_means(self, big_study_batch):
        se = np.sqrt(0.01 * 0.99 / N_BIG)
        assert np.all(np.abs(big_study_batch.mean(axis=0) - 0.01) <= 4 * se)

    def test_edge_correlations(self, big_study_batch):
        m = study()
        C = np.corrcoef(big_study_batch.T)
        for u, v in m.tree.edges:
            assert abs(C[u, v] - 0.7) <= 5 * corr_se(m, u, v, N_BIG)

    def test_path_correlations(self, big_study_batch):
        m = study()
        C = np.corrcoef(big_study_batch.T)
        for u, v in [(3, 4), (1, 2), (3, 6), (0, 5)]:
            assert abs(C[u, v] - correlation(m, u, v)) <= 5 * corr_se(m, u, v, N_BIG)

    def test_chi_square(self):
        # fixed seed; at level 0.001 roughly one seed in a thousand would fail
        m = MeanParamIsing.on(binary_tree(), [0.1, 0.3, 0.5, 0.2, 0.6, 0.4, 0.7], 0.25)
        bits = sample_batch(m, N_BIG, RngStream(2)).by_vertex()
        idx = bits @ (1 << np.arange(7))
        obs = np.bincount(idx, minlength=128)
        exp = joint_table(m) * N_BIG
        assert stats.chisquare(obs, exp).pvalue > 0.001

    def test_lln(self):
        m = MeanParamIsing.on(chain(30), np.linspace(0.05, 0.6, 30), 0.5)
        p = monte_carlo_sum_pmf(m, 20000, 4)
        ex = sum_pmf(m)
        se = np.sqrt(ex.variance() / 20000)
        assert abs(p.mean() - m.q.sum()) <= 4 * se

    def test_point_mass(self):
        m = MeanParamIsing.on(chain(4), 1 - 1e-9, 0.0)
        p = monte_carlo_sum_pmf(m, 1, 0)
        assert p.values.tolist() == [0, 0, 0, 0, 1]


class TestSymmetricFlip:
    def test_requires_half(self):
        with pytest.raises(NotSymmetricModel):
            sample_symmetric_batch(study(), 10, 0)

    def test_alternating_limit(self):
        m = MeanParamIsing.on(chain(6), 0.5, -1 + 1e-9)
        x = sample_symmetric_batch(m, 1000, 0).by_vertex()
        assert np.all(x[:, 1:] != x[:, :-1])

    def test_matches_direct(self):
        m = MeanParamIsing.on(binary_tree(), 0.5, 0.7)
        a = sample_symmetric_batch(m, N_BIG, RngStream(1)).by_vertex() @ (1 << np.arange(7))
        b = sample_batch(m, N_BIG, RngStream(2)).by_vertex() @ (1 << np.arange(7))
        pa = np.bincount(a, minlength=128) / N_BIG
        pb = np.bincount(b, minlength=128) / N_BIG
        assert 0.5 * np.abs(pa - pb).sum() <= 0.01
        assert 0.5 * np.abs(pa - joint_table(m)).sum() <= 0.01


class TestIntervals:
    def test_checks(self):
        with pytest.raises(InputError):
            mc_confidence_intervals(study(), 10, 1)
        with pytest.raises(InputError):
            mc_confidence_intervals(study(), 10, 5, level=1.0)

    def test_two_reps_is_min_max(self):
        ci = mc_confidence_intervals(study(), 300, 2, seed=9)
        assert np.array_equal(ci.lower, ci.estimates.min(axis=0))
        assert np.array_equal(ci.upper, ci.estimates.max(axis=0))

    def test_reproducible(self):
        a = mc_confidence_intervals(study(), 200, 20, seed=3)
        b = mc_confidence_intervals(study(), 200, 20, seed=3)
        assert np.array_equal(a.estimates, b.estimates)

    def test_coverage(self):
        # a level-0.9 interval built from 400 replications should catch a fresh estimate about 90% of the time
        m = study()
        n = 500
        ci = mc_confidence_intervals(m, n, 400, seed=101)
        lo, hi = ci.tail(1)
        fresh = mc_confidence_intervals(m, n, 400, seed=202).estimates[:, 1:].sum(axis=1)
        inside = np.mean((fresh >= lo) & (fresh <= hi))
        assert 0.84 <= inside <= 0.97
        exact = 1 - sum_pmf(m)[0]
        assert lo <= exact <= hi
