import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varopkit.errors import ShapeMismatch, ZeroFactor
from varopkit.factorization import HaagFactorization
from varopkit.fourier import AFn, a_norm_exact
from varopkit.group import MultiFn, cyclic
from varopkit.norms import NormCertificate, haagerup_norm, phi_v_apply, phi_v_isometry_witness, point_slices, schur_norm
from varopkit.transfer import N_n

ROUND = 1e-12  # floating-point slack when an exact value sits on an interval end


def schur_oracle(W: np.ndarray) -> float:
    """Dual formulation: max ||D_a W D_b||_1 over unit a, b, written as an SDP over
    ``[[A, X], [X^H, B]] >= 0`` with ``A``, ``B`` diagonal of unit trace."""
    m, n = W.shape
    M = cp.Variable((m + n, m + n), hermitian=True)
    cons = [M >> 0, cp.real(cp.trace(M[:m, :m])) == 1, cp.real(cp.trace(M[m:, m:])) == 1]
    cons += [M[i, j] == 0 for i in range(m) for j in range(m) if i != j]
    cons += [M[m + i, m + j] == 0 for i in range(n) for j in range(n) if i != j]
    obj = cp.Maximize(cp.real(cp.sum(cp.multiply(W.conj(), M[:m, m:]))))
    prob = cp.Problem(obj, cons)
    prob.solve(solver=cp.SCS, eps=1e-9, max_iters=100000)
    return float(prob.value)


def test_schur_examples():
    for m in (1, 3, 6):
        c = schur_norm(np.eye(m))
        assert c.contains(1.0, 1e-8) and c.width <= 1e-8
    assert schur_norm(np.ones((4, 4))).contains(1.0, ROUND)
    c = schur_norm(np.array([[1, 1], [1, -1]]))
    assert abs(c.upper - np.sqrt(2)) <= 1e-6 and abs(c.lower - np.sqrt(2)) <= 1e-6


@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 4))
def test_schur_certificate_is_sound(seed, m, n):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    c = schur_norm(W)
    assert 0 <= c.lower <= c.upper
    A, B = c.upper_witness.columns
    assert np.max(np.abs(A.T @ B - W)) <= 1e-10
    assert c.upper_witness.bound() == pytest.approx(c.upper, abs=1e-10)
    a, b = c.lower_witness["alpha"], c.lower_witness["beta"]
    dual = np.sum(np.linalg.svd(a[:, None] * W * b[None, :], compute_uv=False))
    assert dual <= c.lower + 1e-12 and np.linalg.norm(a) == pytest.approx(1) and np.linalg.norm(b) == pytest.approx(1)
    assert c.width <= 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_schur_matches_independent_sdp(seed):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((3, 4))
    c = schur_norm(W)
    assert c.contains(schur_oracle(W), 1e-6)


def test_schur_psd_matrix_is_max_diagonal():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((5, 5))
    W = X @ X.T
    assert schur_norm(W).contains(float(np.max(np.diag(W))), 1e-8)


def test_schur_rejects_tensors():
    with pytest.raises(ShapeMismatch):
        schur_norm(np.ones((2, 2, 2)))


def test_certificate_json():
    c = schur_norm(np.eye(2))
    js = c.to_json()
    assert js["lower"] <= js["upper"] and "witness" in js and "alpha" in js["lower_witness"]
    assert isinstance(c, NormCertificate)


def test_haagerup_ones():
    c = haagerup_norm(np.ones((2, 2, 2)))
    assert c.contains(1.0, ROUND) and c.width <= 1e-6
    assert c.extras["slices_checked"] >= 1 and c.extras["bond"] >= 1


def test_haagerup_two_variable_delegates():
    W = np.random.default_rng(2).standard_normal((3, 3))
    assert haagerup_norm(W).upper == pytest.approx(schur_norm(W).upper, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_haagerup_substituted_function_matches_fourier(seed):
    G = cyclic(3)
    u = AFn.random(G, 1, np.random.default_rng(seed))
    c = haagerup_norm(N_n(u).values, group=G)
    assert c.contains(a_norm_exact(u), 1e-4)


def test_haagerup_elementary_tensor():
    rng = np.random.default_rng(4)
    vs = [rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal(2)]
    w = np.einsum("a,b,c->abc", *vs)
    expect = np.prod([np.max(np.abs(v)) for v in vs])
    c = haagerup_norm(w)
    assert c.contains(expect, 1e-9)


def test_haagerup_sound_on_random_tensor():
    rng = np.random.default_rng(5)
    w = rng.standard_normal((2, 3, 2))
    c = haagerup_norm(w, restarts=0, max_sweeps=2)
    assert np.max(np.abs(c.upper_witness.evaluate_array() - w)) <= 1e-10
    assert c.upper_witness.bound() == pytest.approx(c.upper, abs=1e-10)
    assert np.max(np.abs(w)) <= c.lower <= c.upper
    for _, _, M in point_slices(w):
        assert schur_norm(M).lower <= c.upper + 1e-9


def test_haagerup_warm_start_is_merged():
    G = cyclic(2)
    F = HaagFactorization.ones(G, 4)
    c = haagerup_norm(F.evaluate_array(), warm_start=F)
    assert c.upper <= F.bound() + 1e-12


def test_phi_v_examples():
    I = np.eye(2)
    k = np.random.default_rng(0).standard_normal((2, 2))
    assert np.allclose(phi_v_apply([I, I], [k]), k)
    assert np.allclose(phi_v_apply([I, np.zeros((2, 2))], [k]), 0)
    ks, val = phi_v_isometry_witness([I, I])
    assert val == pytest.approx(1)
    ks, val = phi_v_isometry_witness([np.diag([2.0, 0]), np.diag([0, 3.0])])
    assert val == pytest.approx(6)
    e1, e2 = np.eye(2)
    assert np.allclose(np.abs(ks[0]), np.abs(np.outer(e1, e2)))
    with pytest.raises(ZeroFactor):
        phi_v_isometry_witness([I, np.zeros((2, 2))])
    with pytest.raises(ShapeMismatch):
        phi_v_apply([I], [k])


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3))
def test_phi_v_witness_attains_product(seed, d, n):
    rng = np.random.default_rng(seed)
    vs = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(n + 1)]
    ks, val = phi_v_isometry_witness(vs)
    target = np.prod([np.linalg.norm(v, 2) for v in vs])
    assert all(np.linalg.norm(k, 2) == pytest.approx(1) and np.linalg.matrix_rank(k) == 1 for k in ks)
    assert (1 - 1e-10) * target <= val <= target * (1 + 1e-10)


@given(st.integers(0, 2**32 - 1))
def test_phi_v_multilinear(seed):
    rng = np.random.default_rng(seed)
    vs = [rng.standard_normal((3, 3)) for _ in range(3)]
    k1, k2, k3 = (rng.standard_normal((3, 3)) for _ in range(3))
    assert np.allclose(phi_v_apply(vs, [k1 + 2 * k3, k2]), phi_v_apply(vs, [k1, k2]) + 2 * phi_v_apply(vs, [k3, k2]))


def test_sup_norm_below_upper():
    G = cyclic(2)
    w = MultiFn.random(G, 3, np.random.default_rng(3))
    c = haagerup_norm(w, restarts=0, max_sweeps=2)
    assert w.sup_norm() <= c.upper
