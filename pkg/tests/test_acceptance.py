"""Acceptance criteria, each at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py``; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import time

import numpy as np
import pytest

from treeising import params as P
from treeising.distribution import expected_allocations, sum_pmf
from treeising.model import MeanParamIsing, brute_force_allocations, brute_force_sum_pmf
from treeising.pgf import joint_pgf, sum_pgf
from treeising.pmf import stop_loss, tv_distance
from treeising.poisson import MpmrfModel, build_approx, check_convex_order, mpmrf_sum_pmf, tv_bound
from treeising.sampling import RngStream, mc_confidence_intervals, sample_batch
from treeising.tree import binary_tree, chain, random_tree

from .helpers import random_model

criterion = pytest.mark.criterion


def study(q):
    return MeanParamIsing.on(binary_tree(), q, 0.7)


def four_rows(p):
    p = np.asarray(p)
    return np.array([p[0], p[1], p[2], p[3:].sum()])


@pytest.fixture(scope="module")
def oracle_models():
    rng = np.random.default_rng(20240601)
    out = []
    for i in range(200):
        d = int(rng.integers(1, 11))
        out.append(random_model(rng, d, q_lo=0.01, q_hi=0.99))
    return out


@criterion(1)
def test_table1_exact():
    expected = [0.97231, 0.01309, 0.00289, 0.01170]
    assert np.abs(four_rows(sum_pmf(study(0.01)).values) - expected).max() <= 5e-6
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        sum_pmf(study(0.01))  # fresh model, includes the schedule build
        best = min(best, time.perf_counter() - t0)
    assert best < 0.1


@criterion(2)
def test_table1_poisson():
    approx = MpmrfModel.on(binary_tree(), 0.01, 0.7)
    expected = [0.97239, 0.01307, 0.00291, 0.01164]
    assert np.abs(four_rows(mpmrf_sum_pmf(approx).values) - expected).max() <= 5e-6


@criterion(3)
def test_table3():
    m = study(0.001)
    exact = [0.9972031, 0.0013405, 0.0002897, 0.0011666]
    poisson = [0.9972039, 0.0013402, 0.0002899, 0.0011660]
    assert np.abs(four_rows(sum_pmf(m).values) - exact).max() <= 5e-8
    assert np.abs(four_rows(mpmrf_sum_pmf(build_approx(m)).values) - poisson).max() <= 5e-8


@criterion(4)
@pytest.mark.parametrize(
    "q, pi_k, pi_m, tol",
    [
        (
            0.01,
            [0.07000, 0.04231, 0.02772, 0.01602, 0.00901, 0.00446, 0.00121, 0.00000],
            [0.07000, 0.04239, 0.02785, 0.01621, 0.00922, 0.00466, 0.00141, 0.00016],
            5e-6,
        ),
        (
            0.001,
            [0.007000, 0.004203, 0.002747, 0.001580, 0.000888, 0.000438, 0.000118, 0.000000],
            [0.007000, 0.004204, 0.002748, 0.001582, 0.000890, 0.000440, 0.000120, 0.000002],
            5e-7,
        ),
    ],
)
def test_stop_loss_tables(q, pi_k, pi_m, tol):
    m = study(q)
    pk = sum_pmf(m)
    pm = mpmrf_sum_pmf(build_approx(m))
    z = np.arange(8)
    got_k = stop_loss(pk.values, z)
    got_m = stop_loss(pm.values, z)
    assert np.abs(got_k - pi_k).max() <= tol
    assert np.abs(got_m - pi_m).max() <= tol
    assert np.all(got_m >= got_k)
    assert abs(got_k[0] - got_m[0]) <= 1e-12
    assert check_convex_order(pk, pm).verdict


@criterion(5)
def test_tv_bound():
    for q, bound in [(0.01, 0.00084), (0.001, 0.0000084)]:
        m = study(q)
        assert tv_bound(7, q) == pytest.approx(bound, rel=1e-12)
        assert tv_distance(sum_pmf(m), mpmrf_sum_pmf(build_approx(m))) <= bound
    rng = np.random.default_rng(77)
    for _ in range(50):
        d = int(rng.integers(2, 13))
        q = float(rng.uniform(1e-4, 0.05))
        m = MeanParamIsing.on(random_tree(d, rng), q, rng.uniform(0.001, 0.999, d - 1))
        pk = sum_pmf(m)
        pm = mpmrf_sum_pmf(build_approx(m))
        assert tv_distance(pk, pm) <= tv_bound(d, q)
        assert check_convex_order(pk, pm).verdict


@criterion(6)
def test_oracle_equivalence(oracle_models):
    t0 = time.perf_counter()
    worst = 0.0
    for m in oracle_models:
        worst = max(worst, np.abs(sum_pmf(m).values - brute_force_sum_pmf(m).values).max())
        for v in range(m.d):
            a = expected_allocations(m, v).values
            worst = max(worst, np.abs(a - brute_force_allocations(m, v)).max())
    assert worst <= 1e-10
    assert time.perf_counter() - t0 < 30


@criterion(7)
def test_pgf_invariants():
    rng = np.random.default_rng(5)
    for _ in range(40):
        d = int(rng.integers(1, 13))
        m = random_model(rng, d)
        assert abs(sum_pgf(m, 1.0) - 1) <= 1e-14
        assert abs(joint_pgf(m, np.ones(d)) - 1) <= 1e-14
        t = rng.uniform(-1, 1, (100, d)) + 1j * rng.uniform(-1, 1, (100, d))
        ref = joint_pgf(m, t)
        for r in range(d):
            assert np.abs(joint_pgf(m.reroot(r), t) - ref).max() <= 1e-12
        h = 1e-6
        fd = (sum_pgf(m, 1 + h) - sum_pgf(m, 1 - h)).real / (2 * h)
        assert abs(fd - m.q.sum()) <= 1e-6


@criterion(8)
def test_allocation_identities(oracle_models):
    for m in oracle_models:
        p = sum_pmf(m).values
        A = np.vstack([expected_allocations(m, v).values for v in range(m.d)])
        assert np.abs(A.sum(axis=0) - np.arange(m.d + 1) * p).max() <= 1e-10
        assert np.abs(A.sum(axis=1) - m.q).max() <= 1e-10


@criterion(9)
def test_round_trips():
    rng = np.random.default_rng(9)
    for _ in range(40):
        d = int(rng.integers(1, 13))
        m = random_model(rng, d)
        n = P.table_to_natural(P.mean_to_table(m), m.tree)
        back = P.natural_to_mean(n, root=m.rt.root)
        assert np.abs(back.q - m.q).max() <= 1e-9
        assert np.abs(back.alpha - m.alpha).max(initial=0) <= 1e-9
    for _ in range(20):
        d = int(rng.integers(2, 13))
        t = random_tree(d, rng)
        theta = rng.uniform(-2, 2, d - 1)
        m = P.canonical_to_mean(P.CanonicalParamIsing(t, np.zeros(d), theta))
        assert np.abs(m.q - 0.5).max() <= 1e-12
        assert np.abs(m.alpha - np.tanh(theta)).max() <= 1e-12


@criterion(10)
def test_sampler_moments():
    from .test_sampling import corr_se

    m = study(0.01)
    n = 10**6
    x = sample_batch(m, n, RngStream(2024)).by_vertex()
    se = np.sqrt(0.01 * 0.99 / n)
    assert np.abs(x.mean(axis=0) - 0.01).max() <= 4 * se
    C = np.corrcoef(x.T)
    for u, v in m.tree.edges:
        assert abs(C[u, v] - 0.7) <= 5 * corr_se(m, u, v, n)


@criterion(10)
@pytest.mark.parametrize(
    "n, expected",
    [
        (1000, [(0.963, 0.981), (0.007, 0.019), (0.000, 0.006), (0.006, 0.017)]),
        (10000, [(0.9697, 0.9751), (0.0111, 0.0149), (0.0021, 0.0037), (0.0100, 0.0135)]),
    ],
)
def test_mc_intervals(n, expected):
    ci = mc_confidence_intervals(study(0.01), n, 1000, level=0.9, seed=2024)
    got = [ci.point(0), ci.point(1), ci.point(2), ci.tail(3)]
    assert np.abs(np.array(got) - np.array(expected)).max() <= 0.002


@criterion(11)
def test_long_chain():
    d = 100_000
    m = MeanParamIsing.on(chain(d), 0.01, 0.7)
    p = sum_pmf(m)
    assert len(p) == d + 1
    assert abs(p.values.sum() - 1) <= 1e-9
    assert abs(p.mean() - 0.01 * d) <= 1e-6 * d
    assert np.all(p.values >= 0)
