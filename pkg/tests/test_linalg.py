import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hadamard_recursive, pinv_by_eig
from sketchsolve.errors import ContractViolation, InputError
from sketchsolve.linalg import (
    as_matrix,
    eig_sym,
    fwht,
    hadamard_entries,
    least_norm_solution,
    next_power_of_two,
    select_rows,
)


def test_least_norm_identity():
    np.testing.assert_allclose(least_norm_solution(np.eye(3), np.array([1.0, 2, 3])), [1, 2, 3])


def test_least_norm_zero_matrix():
    np.testing.assert_array_equal(least_norm_solution(np.zeros((2, 2)), np.ones(2)), [0, 0])


def test_least_norm_matches_eig_oracle(rng):
    B = rng.standard_normal((3, 3))
    M = B @ B.T
    r = rng.standard_normal(3)
    got = least_norm_solution(M, r)
    want = pinv_by_eig(M) @ r
    assert np.linalg.norm(got - want) <= 1e-10 * np.linalg.norm(want)


def test_least_norm_singular_returns_range_representative(rng):
    B = rng.standard_normal((5, 2))
    M = B @ B.T
    x = rng.standard_normal(5)
    out = least_norm_solution(M, M @ x)
    np.testing.assert_allclose(M @ out, M @ x, atol=1e-9)
    # out lies in range(M) = range(B)
    coef, *_ = np.linalg.lstsq(B, out, rcond=None)
    np.testing.assert_allclose(B @ coef, out, atol=1e-9)


def test_least_norm_scalar_case():
    np.testing.assert_allclose(least_norm_solution(np.array([[4.0]]), np.array([2.0])), [0.5])
    np.testing.assert_array_equal(least_norm_solution(np.array([[0.0]]), np.array([2.0])), [0.0])


def test_least_norm_errors():
    with pytest.raises(ContractViolation):
        least_norm_solution(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones(2))
    with pytest.raises(InputError):
        least_norm_solution(np.array([[np.nan, 0], [0, 1.0]]), np.ones(2))
    with pytest.raises(InputError):
        least_norm_solution(np.eye(2), np.ones(3))


def test_fwht_small_cases():
    np.testing.assert_array_equal(fwht(np.array([1.0])), [1.0])
    np.testing.assert_array_equal(fwht(np.array([1.0, 0.0])), [1.0, 1.0])


def test_fwht_matches_recursive_64(rng):
    v = rng.standard_normal(64)
    np.testing.assert_allclose(fwht(v), hadamard_recursive(64) @ v, atol=1e-12)


def test_fwht_matrix_input_and_no_mutation(rng):
    V = rng.standard_normal((16, 3))
    V0 = V.copy()
    np.testing.assert_allclose(fwht(V), hadamard_recursive(16) @ V, atol=1e-12)
    np.testing.assert_array_equal(V, V0)


def test_fwht_rejects_non_power_of_two():
    with pytest.raises(InputError):
        fwht(np.ones(6))


@settings(max_examples=30, deadline=None)
@given(q=st.integers(0, 9), seed=st.integers(0, 2**31))
def test_fwht_involution(q, seed):
    m = 2**q
    v = np.random.default_rng(seed).standard_normal(m)
    back = fwht(fwht(v))
    assert np.linalg.norm(back - m * v) <= 1e-10 * m * max(np.linalg.norm(v), 1e-300)


def test_hadamard_entries_match_recursive():
    H = hadamard_recursive(32)
    idx = np.arange(32)
    np.testing.assert_array_equal(hadamard_entries(idx, idx), H)


def test_next_power_of_two():
    assert [next_power_of_two(m) for m in (1, 2, 3, 4, 5, 17)] == [1, 2, 4, 4, 8, 32]


def test_select_rows_permutes_identity():
    np.testing.assert_array_equal(select_rows(np.eye(3), [2, 0]), np.eye(3)[[2, 0]])


def test_select_rows_csr_all_rows(rng):
    M = sp.random(6, 5, density=0.4, format="csr", random_state=1)
    out = select_rows(M, np.arange(6))
    assert (out != M).nnz == 0


def test_select_rows_manual(rng):
    M = rng.standard_normal((5, 5))
    out = select_rows(M, [1, 3])
    for a, i in enumerate([1, 3]):
        for j in range(5):
            assert out[a, j] == M[i, j]


def test_select_rows_out_of_range():
    with pytest.raises(InputError):
        select_rows(np.eye(3), [3])
    with pytest.raises(InputError):
        select_rows(np.eye(3), [-1])


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    first=st.lists(st.integers(0, 5), min_size=1, max_size=6),
    second=st.lists(st.integers(0, 5), min_size=1, max_size=6),
)
def test_select_rows_composes(seed, first, second):
    M = np.random.default_rng(seed).standard_normal((6, 4))
    inner = select_rows(M, first)
    second = [i % len(first) for i in second]
    np.testing.assert_array_equal(select_rows(inner, second), select_rows(M, np.asarray(first)[second]))


def test_eig_sym_diag():
    w, V = eig_sym(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(w, [1, 2, 3])
    np.testing.assert_allclose(np.abs(V), np.eye(3))


def test_eig_sym_swap():
    w, _ = eig_sym(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(w, [-1, 1])


def test_eig_sym_postconditions(rng):
    B = rng.standard_normal((4, 4))
    M = B + B.T
    w, V = eig_sym(M)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(M @ V - V * w) <= 1e-8 * np.linalg.norm(M)
    np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-10)


def test_eig_sym_rejects_nonsymmetric():
    with pytest.raises(ContractViolation):
        eig_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_as_matrix_canonicalizes_csr():
    M = sp.coo_matrix(([1.0, 2.0], ([0, 0], [1, 1])), shape=(2, 2))
    out = as_matrix(M)
    assert sp.isspmatrix_csr(out) or out.format == "csr"
    assert out.has_canonical_format
    assert out[0, 1] == 3.0
    with pytest.raises(InputError):
        as_matrix(np.array([[np.inf]]))
