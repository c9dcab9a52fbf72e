import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats

from shallowpac.metrics import tv_exact
from shallowpac.models import all_outcomes, analytic_conditional, analytic_pmf, outcome_index, signed_class
from shallowpac.numtheory import ProblemParams
from shallowpac.sampling import draw_samples
from shallowpac.simulator import (
    CircuitDescriptor,
    block_partition,
    bpm_state,
    circuit_descriptor,
    descriptor_pmf,
    q_conditional_rank2,
    q_pmf,
    q_pmf_dense,
    q_pmf_rank2,
    q_sample_rank2,
    q_samples_rank2,
    q_state,
    q_statevector_dense,
)


def test_block_partition_examples():
    assert block_partition(7, 3) == [[1, 2, 3], [4, 5, 6]]
    assert block_partition(7, 2) == [[1, 2], [3, 4], [5, 6]]
    assert block_partition(7, 4) == [[1, 2, 3, 4, 5, 6]]
    assert block_partition(7, 5) == [[1, 2, 3, 4, 5, 6]]
    assert block_partition(15, 4) == [[1, 2, 3, 4], [5, 6, 7, 8, 9], [10, 11, 12, 13, 14]]
    for bad in [1, 7]:
        with pytest.raises(ValueError):
            block_partition(7, bad)


def test_bpm_state_structure():
    n = 5
    psi = bpm_state(n)
    assert math.isclose(np.vdot(psi, psi).real, 1.0)
    assert np.count_nonzero(psi) == 2 ** (n - 1) * 2


def test_bpm_preparation_gates_match_definition():
    pr = ProblemParams(5, 3, 0, 2)
    desc = circuit_descriptor(pr)
    prep = CircuitDescriptor(desc.qubits, [g for g in desc.gates if g.layer <= 3])
    from shallowpac.simulator import simulate_descriptor

    assert np.allclose(simulate_descriptor(prep), bpm_state(5), atol=1e-12)


@pytest.mark.parametrize("n,p,m", [(5, 3, 2), (5, 5, 4), (7, 3, 3), (7, 5, 2)])
def test_dense_normalised_with_uniform_d(n, p, m):
    t = q_pmf_dense(ProblemParams(n, p, 1, m)).dense()
    assert abs(t.sum() - 1) < 1e-9
    d_marg = t.reshape(2 ** (n - 1), -1).sum(axis=1)
    assert np.allclose(d_marg, 2.0 ** (-(n - 1)), atol=1e-12)


@pytest.mark.parametrize("n,p,m", [(5, 3, 2), (7, 3, 3), (7, 5, 3)])
def test_dx_marginal_is_not_uniform(n, p, m):
    # finding: unlike the cos^2 law, the circuit law skews (d, x); only d stays uniform
    t = q_pmf_dense(ProblemParams(n, p, 0, m)).dense()
    dx = t.reshape(-1, 2).sum(axis=1)
    rel = np.abs(dx * 2.0 ** (2 * n - 2) - 1).max()
    assert rel > 0.05
    assert abs(dx.sum() - 1) < 1e-12


def test_exact_A_circuit_reproduces_cos2_law():
    for n, p, m, s in [(5, 3, 2, 0), (5, 5, 4, 3), (7, 3, 3, 2), (7, 5, 2, 1)]:
        pr = ProblemParams(n, p, s, m)
        assert np.abs(q_pmf_dense(pr, exact_a=True).dense() - analytic_pmf(pr).dense()).max() < 1e-12


@pytest.mark.parametrize("n", [5, 7])
@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("m", [2, 3])
def test_rank2_matches_dense(n, p, m):
    for s in range(p):
        pr = ProblemParams(n, p, s, m)
        X = all_outcomes(pr.n_bits)
        assert np.abs(q_pmf_dense(pr).dense() - q_pmf_rank2(pr, X)).max() <= 1e-9


def test_rank2_state_norm_and_overlaps(rng):
    pr = ProblemParams(7, 3, 0, 3)
    psi = q_statevector_dense(pr).reshape(2**6, -1)
    for _ in range(20):
        d = rng.integers(0, 2, 6).astype(np.int8)
        st_ = q_state(pr, d)
        assert abs(st_.norm() - 1) < 1e-9
        assert abs(st_.branch_overlap()) < 1e-12
        dense_block = psi[int(outcome_index(d[None])[0])] * 2 ** ((7 - 1) / 2)
        assert np.allclose(st_.to_vector(), dense_block, atol=1e-12)
        x = rng.integers(0, 2, 6)
        assert np.isclose(st_.amplitude(x, 1), st_.to_vector()[int(outcome_index(np.r_[x, 1][None])[0])])


def test_rank2_normalisation_per_d(rng):
    pr = ProblemParams(7, 5, 2, 2)
    dx = all_outcomes(6)
    for _ in range(5):
        d = rng.integers(0, 2, 6).astype(np.int8)
        rows = np.column_stack([np.tile(d, (2 * len(dx), 1)), np.repeat(dx, 2, axis=0), np.tile([0, 1], len(dx))])
        assert abs(q_pmf_rank2(pr, rows).sum() - 2.0**-6) < 1e-9


def test_zero_angle_limit_gives_ghz_interference():
    # with the block gates switched off only the output rotation acts
    from shallowpac import simulator

    pr = ProblemParams(5, 3, 0, 2)
    orig = simulator._branch_table
    try:
        simulator._branch_table = lambda size, theta, exact_a=False: orig(size, 1e-300, exact_a)
        X = all_outcomes(pr.n_bits)
        probs = q_pmf_rank2(pr, X)
    finally:
        simulator._branch_table = orig
    cond = probs.reshape(-1, 2)
    par = X[::2, 4:8].sum(1) & 1
    assert np.allclose(cond.sum(1), 2.0**-8)
    assert np.allclose(cond[np.arange(len(cond)), par] / cond.sum(1), 0.5)


def test_conditional_oracle():
    pr = ProblemParams(7, 3, 1, 3)
    X = all_outcomes(pr.n_bits)
    c = q_conditional_rank2(pr, X)
    assert np.allclose(c.reshape(-1, 2).sum(1), 1.0)
    pmf = q_pmf(pr)
    assert np.allclose(pmf.prob(X[:50]), q_pmf_rank2(pr, X[:50]))


def test_sampler_frequencies_match_dense():
    pr = ProblemParams(7, 3, 0, 3)
    N = 10**6
    X = draw_samples("unitary-q", pr, N, 7)
    P = q_pmf_dense(pr).dense()
    counts = np.bincount(outcome_index(X), minlength=len(P))
    se = np.sqrt(P * (1 - P) / N)
    z = np.abs(counts / N - P) / se
    # a correct sampler puts ~0.27% of outcomes beyond 3 SE; require the count to be
    # typical of that rate, no outcome beyond a Bonferroni-level deviation, and a sane chi-square
    n_out = len(P)
    limit = stats.binom.ppf(1 - 1e-4, n_out, 2 * stats.norm.sf(3))
    assert (z > 3).sum() <= limit
    assert z.max() < stats.norm.isf(1e-3 / (2 * n_out))
    assert stats.chisquare(counts, P * N).pvalue > 1e-4


def test_sampler_determinism_and_single_draw():
    pr = ProblemParams(15, 5, 3, 4)
    a = q_samples_rank2(pr, 500, 3)
    assert np.array_equal(a, q_samples_rank2(pr, 500, 3))
    assert q_samples_rank2(pr, 0, 1).shape == (0, 29)
    s = q_sample_rank2(pr, 1)
    assert len(s.x) == 14


@pytest.fixture(scope="module")
def large_run():
    pr = ProblemParams(255, 5, 0, 5)
    t0 = time.perf_counter()
    X = q_samples_rank2(pr, 100_000, 2024)
    elapsed = time.perf_counter() - t0
    n = pr.n
    k = np.mod(signed_class(pr, X[:, : n - 1], X[:, n - 1 : 2 * n - 2]), pr.p)
    agree = X[:, -1] == (X[:, n - 1 : 2 * n - 2].sum(1) & 1)
    return pr, X, k, agree, elapsed


@pytest.mark.slow
def test_large_sampler_speed_and_self_consistency(large_run):
    pr, X, k, agree, elapsed = large_run
    assert elapsed < 60
    n = pr.n
    Z = X[:20_000].copy()
    Z[:, -1] = Z[:, n - 1 : 2 * n - 2].sum(1) & 1
    exact = q_conditional_rank2(pr, Z)
    for j in range(pr.p):
        sel = k == j
        assert abs(agree[sel].mean() - exact[sel[:20_000]].mean()) < 0.01


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="the circuit law sits ~0.053 from the cos^2 law in two classes at m=5")
def test_large_sampler_buckets_near_cos2(large_run):
    pr, X, k, agree, _ = large_run
    gaps = [abs(agree[k == j].mean() - analytic_conditional(pr, j)) for j in range(pr.p)]
    assert max(gaps) <= 0.05


def test_descriptor_shape_and_roundtrip():
    pr = ProblemParams(5, 3, 1, 2)
    desc = circuit_descriptor(pr)
    assert desc.qubits == 9
    assert sum(g.name == "u_dagger" for g in desc.gates) == len(block_partition(5, 2))
    assert desc.depth() == 7
    again = CircuitDescriptor.from_json(desc.to_json())
    assert tv_exact(descriptor_pmf(again, pr), q_pmf_dense(pr)) < 1e-9
    assert np.abs(descriptor_pmf(desc).dense() - q_pmf_dense(pr).dense()).max() < 1e-9


def test_descriptor_rejects_bad_json():
    with pytest.raises(ValueError):
        CircuitDescriptor.from_json({"qubits": 2, "gates": [{"name": "h", "qubits": [3]}]})
    with pytest.raises(ValueError):
        CircuitDescriptor.from_json({"qubits": 2, "gates": [{"name": "mystery", "qubits": [0]}]})


def test_dense_size_cap():
    with pytest.raises(ValueError):
        bpm_state(13)


def test_descriptor_json_inlines_matrices_on_request():
    pr = ProblemParams(5, 3, 2, 4)
    desc = circuit_descriptor(pr)
    slim, full = desc.to_json(), desc.to_json(include_matrices=True)
    assert all("matrix" not in g for g in slim["gates"])
    assert any("matrix" in g for g in full["gates"])
    for obj in (slim, full):
        again = CircuitDescriptor.from_json(obj)
        assert np.abs(descriptor_pmf(again).dense() - q_pmf_dense(pr).dense()).max() < 1e-12
    with pytest.raises(ValueError):
        CircuitDescriptor.from_json({"qubits": 2, "gates": [{"name": "cycle_inverse", "qubits": [0], "params": {"m": 2}}]})
