import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import feasible_weights, partial_sum_margin, random_eigenvalues, random_orthogonal, violating_weights
from rankone.errors import BadDimension, EmptyInput, InputError, NotPositive
from rankone.feasibility import WeightSequence, check_ffi, check_finite, frame_bound, nonzero_eigenvalues


def test_worked_examples():
    ok = check_finite([5.0, 4.0], [3.0, 3.0, 2.0, 1.0])
    assert ok.feasible and ok.violating_p is None and ok.count_ok
    bad = check_finite([5.0, 2.0, 2.0], [4.0, 4.0, 1.0])
    assert not bad.feasible
    assert bad.violating_p == 2
    assert bad.count_ok and bad.sum_gap == 0.0


def test_too_few_weights():
    r = check_finite([3.0, 2.0, 1.0], [4.0, 2.0])
    assert not r.feasible and not r.count_ok


def test_total_mismatch():
    r = check_finite([2.0, 1.0], [1.0, 1.0, 1.5])
    assert not r.feasible and r.sum_gap == pytest.approx(0.5)
    assert r.violating_p is None


def test_tolerance_is_additive():
    assert check_finite([2.0, 1.0], [2.0 + 1e-10, 1.0 - 1e-10]).feasible
    r = check_finite([2.0, 1.0], [2.0 + 1e-6, 1.0 - 1e-6])
    assert not r.feasible and r.violating_p == 1
    assert check_finite([2.0, 1.0], [2.0 + 1e-6, 1.0 - 1e-6], tol=1e-5).feasible


def test_zeros_in_spectrum_dropped():
    # rank 2 operator in dimension 4: two weights suffice
    assert check_finite([0.0, 3.0, 0.0, 1.0], [2.0, 2.0]).feasible
    np.testing.assert_array_equal(nonzero_eigenvalues([0.0, 3.0, 1e-12, 1.0]), [3.0, 1.0])


def test_input_errors():
    with pytest.raises(EmptyInput):
        check_finite([], [1.0])
    with pytest.raises(EmptyInput):
        check_finite([1.0], [])
    with pytest.raises(EmptyInput):
        check_finite([0.0, 0.0], [1.0])
    with pytest.raises(InputError):
        check_finite([1.0], [1.0, -0.5])
    with pytest.raises(NotPositive):
        check_finite([2.0, -0.1], [1.0, 0.9])


def test_weight_sequence_order_is_stable():
    w = WeightSequence.of([1.0, 3.0, 1.0, 2.0])
    np.testing.assert_array_equal(w.sorted, [3.0, 2.0, 1.0, 1.0])
    np.testing.assert_array_equal(w.order, [1, 3, 0, 2])
    np.testing.assert_array_equal(WeightSequence.from_norms([2.0, 1.0]).weights, [4.0, 1.0])


def test_single_eigenvalue_any_split():
    assert check_finite([5.0], [1.0, 1.5, 2.5]).feasible
    assert check_finite([5.0], [5.0]).feasible


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 12), extra=st.integers(0, 20), seed=st.integers(0, 2**32 - 1))
def test_generated_feasible_weights_pass(n, extra, seed):
    rng = np.random.default_rng(seed)
    b = random_eigenvalues(rng, n)
    c = feasible_weights(rng, b, n + extra)
    assert check_finite(b, c).feasible


@settings(max_examples=200, deadline=None)
@given(n=st.integers(2, 12), extra=st.integers(0, 20), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_generated_violations_are_caught(n, extra, seed, data):
    rng = np.random.default_rng(seed)
    b = random_eigenvalues(rng, n)
    p = data.draw(st.integers(1, n - 1))
    c = violating_weights(rng, b, n + extra, p)
    if c is None:
        return
    r = check_finite(b, c)
    assert not r.feasible
    assert r.violating_p is not None and r.violating_p <= p


@settings(max_examples=150, deadline=None)
@given(n=st.integers(1, 8), k=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_spectra_of_random_sums_are_feasible(n, k, seed):
    # any sum of weighted unit projections must pass: its spectrum is the oracle
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((k, n))
    x /= np.linalg.norm(x, axis=1)[:, None]
    c = rng.uniform(0.1, 3.0, k)
    b = np.linalg.eigvalsh((x.T * c) @ x)
    assert check_finite(np.clip(b, 0, None), c).feasible


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 8), extra=st.integers(0, 8), seed=st.integers(0, 2**32 - 1))
def test_permutation_invariant(n, extra, seed):
    rng = np.random.default_rng(seed)
    b = random_eigenvalues(rng, n)
    c = feasible_weights(rng, b, n + extra)
    if rng.random() < 0.5:
        c[int(np.argmax(c))] += 0.5
    a = check_finite(b, c)
    z = check_finite(rng.permutation(b), rng.permutation(c))
    assert a.feasible == z.feasible and a.violating_p == z.violating_p


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 8), extra=st.integers(0, 10), seed=st.integers(0, 2**32 - 1))
def test_ffi_agrees_with_partial_sums(n, extra, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.2, 1.5, n + extra)
    ok, lam = check_ffi(a, n)
    assert lam == pytest.approx(frame_bound(a, n))
    assert ok == check_finite(np.full(n, lam), a * a).feasible


def test_ffi_examples():
    assert check_ffi([1.0, 1.0, 1.0], 2) == (True, 1.5)
    ok, lam = check_ffi([2.0, 1.0, 1.0], 2)
    assert not ok and lam == 3.0
    with pytest.raises(BadDimension):
        check_ffi([1.0], 2)
    with pytest.raises(InputError):
        check_ffi([1.0, 0.0], 1)


def test_margin_helper_matches_report():
    b, c = [5.0, 2.0, 2.0], [4.0, 4.0, 1.0]
    assert partial_sum_margin(b, c) == -1.0
    rng = np.random.default_rng(0)
    q = random_orthogonal(rng, 3)
    assert check_finite(np.linalg.eigvalsh(q @ np.diag(b) @ q.T), [3.0, 3.0, 3.0]).feasible
