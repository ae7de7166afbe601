import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from lpvkit import pvmatrix as pm
from lpvkit.pvmatrix import BasisFunction, PVMatrix, pdiff, pfun, pmatrix, preal, pshift
from lpvkit.scheduling import DomainMismatchError, extend_trajectory, make_timemap

from pm_oracle import check_pair, homomorphism_suite, operations, random_pmatrix


def two_shift_affine(A0=1.0, A1=2.0, A2=3.0):
    return pmatrix([A0, A1, A2], "affine", [0, 1, 2], make_timemap([0, -1]))


def test_two_shift_affine_value():
    P = two_shift_affine()
    # canonical columns (p,-1), (p,0)
    assert_allclose(P.eval([-1.0, 1.0]), [[0.0]], atol=1e-14)


def test_two_shift_affine_matrix_coefficients():
    rng = np.random.default_rng(0)
    A0, A1, A2 = rng.standard_normal((3, 2, 2))
    P = two_shift_affine(A0, A1, A2)
    pt, pt1 = 0.7, -1.3
    assert_allclose(P.eval([pt1, pt]), A0 + A1 * pt + A2 * pt1, atol=1e-14)


def test_two_channel_affine_value():
    P = pmatrix([1.0, 2.0, 3.0, 4.0], "affine", [1, 2, 3, 4], make_timemap([-1, 0], names=["p", "q"]))
    assert_allclose(P.eval(np.ones(4)), [[10.0]], atol=1e-14)


def test_poly_basis_square():
    P = pmatrix([1.0, 2.0, 1.0], "poly", [[2, 0], [1, 1], [0, 2]], make_timemap([-2, 0]))
    rng = np.random.default_rng(1)
    for pt2, pt in rng.uniform(-2, 2, size=(10, 2)):
        assert_allclose(P.eval([pt2, pt])[0, 0], pt2**2 + 2 * pt * pt2 + pt**2, atol=1e-14)


def test_operator_construction_matches_constructor():
    rng = np.random.default_rng(2)
    A0, A1, A2 = rng.standard_normal((3, 2, 2))
    p = preal("p")
    Q = A0 + A1 * p + A2 * pshift(p, -1)
    P = two_shift_affine(A0, A1, A2)
    rho = rng.standard_normal((5, 2))
    assert_allclose(Q.eval(rho), P.eval(rho), atol=1e-14)
    assert Q.tm == P.tm


def test_constant_only():
    P = pmatrix([np.eye(2)])
    assert P.is_constant
    assert_array_equal(P.eval([5.0]), np.eye(2))


def test_preal_value():
    assert preal("p").eval([3.0])[0, 0] == 3.0


def test_preal_rejects_empty_name():
    with pytest.raises(ValueError):
        preal("")


def test_all_basis_zero_gives_A0():
    P = two_shift_affine(4.0, 2.0, 3.0)
    assert_allclose(P.eval([0.0, 0.0]), [[4.0]])


def test_product_escalates_to_monomial():
    p = preal("p")
    P = (1 + p) * (1 - p)
    for v in (0.0, 1.0, 2.0):
        assert_allclose(P.eval([v])[0, 0], 1 - v**2)
    assert P.basis[0].kind == "monomial"
    assert_allclose(P.coeffs[:, 0, 0], [1.0, -1.0])


def test_kron_identity():
    P = pm.kron(np.eye(2), preal("p"))
    assert_allclose(P.eval([5.0]), np.diag([5.0, 5.0]))


def test_add_zero_is_identity():
    rng = np.random.default_rng(3)
    P = random_pmatrix(rng, (2, 3))
    assert (P + np.zeros((2, 3))).equals(P)


def test_duplicate_merging():
    tm = make_timemap([0])
    P = pmatrix([0.0, 2.0, 5.0], "affine", [0, 1, 1], tm)
    assert len(P.basis) == 1
    assert_allclose(P.coeffs[1], [[7.0]])


def test_tiny_terms_dropped():
    p = preal("p")
    P = p - (p - 1e-16 * p)
    assert P.is_constant


def test_canonicalization_idempotent():
    rng = np.random.default_rng(4)
    P = random_pmatrix(rng, (2, 2), "monomial")
    assert PVMatrix(P.coeffs, P.basis, P.tm).equals(P)


def test_pshift_enumeration():
    Q = pshift(preal("p"), -1)
    ext = extend_trajectory(Q.tm, np.array([1.0, 2.0, 3.0]))
    # first valid row is t=2 (1-based) and holds p_1
    assert Q.eval(ext.samples[0])[0, 0] == 1.0


def test_pshift_constant_fixed_point():
    C = pmatrix([np.eye(2)])
    assert_array_equal(pshift(C, -5).eval(np.zeros(1)), np.eye(2))


def test_pshift_inverse_and_group_action():
    rng = np.random.default_rng(5)
    P = random_pmatrix(rng, (2, 2))
    assert pshift(pshift(P, -1), 1).equals(P)
    a, b = -2, 1
    assert pshift(pshift(P, a), b).equals(pshift(P, a + b))


def test_pshift_rejects_ct():
    with pytest.raises(DomainMismatchError):
        pshift(preal("p", "ct"), 1)


def test_pdiff_rejects_dt():
    with pytest.raises(DomainMismatchError):
        pdiff(preal("p"), 1)


def test_pdiff_linear_signal_evaluates_to_one():
    dP = pdiff(preal("p", "ct"), 1)
    from lpvkit.scheduling import SchedulingTrajectory

    t = np.arange(50) * 0.01
    vals = dP.evaluate(SchedulingTrajectory(t, ["p"], 0.01))
    assert_allclose(vals[5:-5, 0, 0], 1.0, atol=1e-10)


def test_pdiff_product_rule():
    p = preal("p", "ct")
    d = pdiff(p * p, 1)
    # d/dt p^2 = 2 p p'; columns (p,0), (p,1)
    assert_allclose(d.eval([3.0, 0.5])[0, 0], 3.0)


def test_pdiff_constant_is_zero():
    d = pdiff(pmatrix([2.0], tm=make_timemap([0], "ct")), 1)
    assert_allclose(d.eval(np.zeros(d.tm.dim)), [[0.0]])


def test_domain_mix_rejected():
    with pytest.raises(DomainMismatchError):
        preal("p") + preal("p", "ct")


def test_shape_errors():
    with pytest.raises(ValueError):
        pmatrix([np.eye(2), np.ones((2, 3))])
    with pytest.raises(ValueError):
        pmatrix([1.0, 2.0], "affine", [0, 3], make_timemap([0]))
    with pytest.raises(ValueError):
        pmatrix([1.0, 2.0], "poly", [[0], [1, 1]], make_timemap([0]))
    with pytest.raises(ValueError):
        (preal("p") * np.ones((2, 3))) @ np.ones((2, 2))


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        pm.matrix_power(pmatrix([np.eye(2)]), -1)


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        two_shift_affine().eval([1.0])


def test_custom_basis_product():
    c = pfun("cos", np.cos, ["p"])
    P = c * preal("p")
    assert_allclose(P.eval([0.5])[0, 0], 0.5 * np.cos(0.5))


def test_frozen_sets_all_shifts():
    assert_allclose(two_shift_affine().frozen(2.0), [[1 + 2 * 2 + 3 * 2]])


def test_serialization_roundtrip():
    rng = np.random.default_rng(6)
    P = random_pmatrix(rng, (2, 3), "monomial")
    Q = pm.from_dict(pm.to_dict(P))
    assert Q.equals(P)


def test_basis_function_degree_merge():
    b = BasisFunction.affine("p", 0) * BasisFunction.affine("p", 0)
    assert b.degrees == {("p", 0): 2}


@pytest.mark.parametrize("op_index", range(17))
def test_homomorphism_each_operation(op_index):
    rng = np.random.default_rng(100 + op_index)
    for _ in range(10):
        op = operations(rng)[op_index]
        assert check_pair(rng, op) < 1e-12


def test_homomorphism_suite_small():
    res = homomorphism_suite(seed=1, n_pairs=10)
    assert len(res) == 17
    assert max(res.values()) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_transpose_property(seed):
    rng = np.random.default_rng(seed)
    P = random_pmatrix(rng, (2, 3))
    rho = rng.standard_normal((4, P.tm.dim))
    assert_allclose(P.T.eval(rho), np.transpose(P.eval(rho), (0, 2, 1)), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(-3, 3), st.integers(-3, 3))
def test_shift_group_property(seed, a, b):
    P = random_pmatrix(np.random.default_rng(seed), (2, 2))
    assert pshift(pshift(P, a), b).equals(pshift(P, a + b))
