import numpy as np
import pytest
from conftest import finite_diff_grad

from dcprox.datasets import gen_poisson_cs
from dcprox.metric import DiagonalMetric
from dcprox.poisson import (PoissonCsData, build_poisson_problem, kl_split,
                            kl_value_grad, l1_nonneg_proximable,
                            l1_nonneg_scaled_prox)
from dcprox.problem import EvaluationDomainError, objective


def test_single_cell_frozen_values():
    data = PoissonCsData(A=np.array([[1.0]]), b=np.array([2.0]), bg=0.5)
    v, g = kl_value_grad(data, np.array([0.5]))
    assert v == pytest.approx(0.3862943611198906, rel=1e-14)
    assert g == pytest.approx(np.array([-1.0]), rel=1e-14)


def test_zero_count_rows_contribute_intensity_only():
    data = PoissonCsData(A=np.array([[1.0], [2.0]]), b=np.array([0.0, 0.0]),
                         bg=0.25)
    v, g = kl_value_grad(data, np.array([1.0]))
    assert v == pytest.approx((1.0 + 0.25) + (2.0 + 0.25), rel=1e-14)
    assert g == pytest.approx(np.array([3.0]), rel=1e-14)


def test_gradient_matches_finite_differences():
    data, _ = gen_poisson_cs(n=20, m=8, k_nonzeros=3, amp_max=50.0, rng=4)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.uniform(0.5, 3.0, 20)
        _, g = kl_value_grad(data, x)
        fd = finite_diff_grad(lambda z: kl_value_grad(data, z)[0], x, step=1e-7)
        assert np.allclose(g, fd, rtol=1e-5, atol=1e-7)


def test_split_recomposes_negative_gradient():
    data, _ = gen_poisson_cs(n=25, m=10, k_nonzeros=4, amp_max=100.0, rng=2)
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.uniform(0.0, 2.0, 25)
        _, g = kl_value_grad(data, x)
        U, V = kl_split(data, x)
        scale = np.maximum(1.0, np.abs(g))
        assert np.max(np.abs((U - V) + g) / scale) <= 1e-12
        assert np.all(U >= 0.0)
        assert np.all(V > 0.0)


def test_negative_point_rejected():
    data = PoissonCsData(A=np.array([[1.0]]), b=np.array([1.0]))
    with pytest.raises(EvaluationDomainError):
        kl_value_grad(data, np.array([-0.1]))
    with pytest.raises(EvaluationDomainError):
        kl_split(data, np.array([-0.1]))


def test_data_validation():
    with pytest.raises(ValueError):
        PoissonCsData(A=np.array([[-1.0]]), b=np.array([1.0]))
    with pytest.raises(ValueError):
        PoissonCsData(A=np.array([[1.0]]), b=np.array([-1.0]))
    with pytest.raises(ValueError):
        PoissonCsData(A=np.array([[1.0]]), b=np.array([1.0]), bg=0.0)
    with pytest.raises(ValueError):
        PoissonCsData(A=np.array([[1.0]]), b=np.array([1.0, 2.0]))


def test_nonneg_threshold_frozen():
    D = DiagonalMetric(np.array([2.0, 0.5]))
    out = l1_nonneg_scaled_prox(np.array([2.0, -0.5]), 1.0, 1.0, D)
    assert np.allclose(out, [1.5, 0.0], rtol=0, atol=0)
    plain = l1_nonneg_scaled_prox(np.array([2.0, -0.5, 0.3]), 1.0, 0.5)
    assert np.allclose(plain, [1.5, 0.0, 0.0])
    with pytest.raises(ValueError):
        l1_nonneg_scaled_prox(np.array([1.0]), 0.0, 1.0)


def test_nonneg_penalty_eval():
    g = l1_nonneg_proximable(0.5)
    assert g.eval(np.array([1.0, 2.0])) == pytest.approx(1.5)
    assert g.eval(np.array([1.0, -1e-9])) == np.inf


def test_problem_assembly_and_domain_guard():
    data, _ = gen_poisson_cs(n=15, m=6, k_nonzeros=2, amp_max=20.0, rng=0)
    prob = build_poisson_problem(data)
    assert prob.feasible_set.kind == "nonnegative-orthant"
    assert prob.grad_split is not None
    x = np.random.default_rng(5).uniform(0.0, 1.0, 15)
    v, _ = kl_value_grad(data, x)
    want = v + data.lam * x.sum() - data.lam * np.linalg.norm(x)
    assert objective(prob, x) == pytest.approx(want, rel=1e-13)
    # infinite g short-circuits before the smooth part can raise
    assert objective(prob, -x) == np.inf


def test_zero_column_rejected_at_build():
    A = np.array([[1.0, 0.0], [1.0, 0.0]])
    data = PoissonCsData(A=A, b=np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        build_poisson_problem(data)


def test_split_provider_feeds_variable_metric():
    # the V part of the split is what builds the metric denominator
    data, _ = gen_poisson_cs(n=12, m=5, k_nonzeros=2, amp_max=10.0, rng=1)
    x = np.full(12, 0.5)
    U, V = kl_split(data, x)
    col_sums = np.asarray(data.A.sum(axis=0)).ravel()
    assert np.allclose(V, col_sums, rtol=1e-12)
