import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varopkit.errors import ArityError, ArityMismatch
from varopkit.fourier import (
    AFn,
    RepWitness,
    a_norm_exact,
    a_norm_variational,
    multiplier_apply,
    multiplier_conv,
    multiplier_operator,
    pullback_witness,
    slice_lower,
    theta_embed,
)
from varopkit.factorization import OpFactorization
from varopkit.group import MultiFn, build_group, cyclic, symmetric


def group_matrix_trace_norm(u: MultiFn) -> float:
    """Independent oracle: ``||[u(x y^-1)]||_1 / |G|`` needs no representations."""
    G = u.group
    M = u.values[G.mul[:, G.inv]]
    return float(np.sum(np.linalg.svd(M, compute_uv=False))) / G.order


groups = st.sampled_from(["c2", "c3", "c4", "s3", "d4", "q8", "c2xc2"])


@given(groups, st.integers(0, 2**32 - 1))
def test_a_norm_exact_matches_group_matrix_oracle(desc, seed):
    G = build_group(desc)
    u = AFn.random(G, 1, np.random.default_rng(seed))
    assert a_norm_exact(u) == pytest.approx(group_matrix_trace_norm(u), rel=1e-10)


@given(groups, st.integers(0, 2**32 - 1))
def test_a_norm_dominates_sup_and_is_submultiplicative(desc, seed):
    G = build_group(desc)
    rng = np.random.default_rng(seed)
    u, v = AFn.random(G, 1, rng), AFn.random(G, 1, rng)
    assert a_norm_exact(u) >= u.sup_norm() - 1e-12
    assert a_norm_exact(u * v) <= a_norm_exact(u) * a_norm_exact(v) + 1e-9


def test_a_norm_exact_examples(small_group):
    G = small_group
    assert a_norm_exact(AFn.const(G, 1, -2.5)) == pytest.approx(2.5)
    assert a_norm_exact(AFn.point_mass(G, (0,))) == pytest.approx(1.0)
    assert a_norm_exact(AFn(cyclic(2), [1, -1])) == pytest.approx(1.0)
    with pytest.raises(ArityError):
        a_norm_exact(AFn.const(G, 2))


def test_variational_one_variable():
    G = cyclic(2)
    cert, wit = a_norm_variational(AFn.point_mass(G, (0,)))
    assert cert.contains(1.0, 1e-12) and cert.width <= 1e-6 and not cert.flagged
    assert wit.residual(AFn.point_mass(G, (0,))) <= 1e-10


@pytest.mark.parametrize("desc", ["c3", "s3", "d4"])
def test_variational_one_variable_tight(desc):
    G = build_group(desc)
    rng = np.random.default_rng(4)
    for _ in range(3):
        u = AFn.random(G, 1, rng)
        cert, wit = a_norm_variational(u)
        assert cert.width <= 1e-6
        assert cert.contains(group_matrix_trace_norm(u), 1e-12)
        assert wit.value() == pytest.approx(cert.upper)
        assert wit.residual(u) <= 1e-9 * max(1, u.sup_norm())


def test_variational_constant_two_variables():
    G = cyclic(2)
    cert, wit = a_norm_variational(AFn.const(G, 2, 1.0))
    assert cert.contains(1.0, 1e-12)


def test_variational_product_function_s3():
    G = symmetric(3)
    v = AFn.random(G, 1, np.random.default_rng(8))
    u = theta_embed(v, 2)
    cert, wit = a_norm_variational(u, restarts=0, pullback=False)
    assert cert.upper <= a_norm_exact(v) + 1e-6
    assert wit.residual(u) <= 1e-9 * max(1, u.sup_norm())


@pytest.mark.parametrize("desc", ["c2", "c3"])
def test_variational_two_variables_sound(desc):
    G = build_group(desc)
    u = AFn.random(G, 2, np.random.default_rng(11))
    cert, wit = a_norm_variational(u, restarts=1)
    assert u.sup_norm() <= cert.lower <= cert.upper
    assert wit.residual(u) <= 1e-9 * max(1, u.sup_norm())
    assert wit.value() == pytest.approx(cert.upper)
    low, where = slice_lower(u)
    assert cert.lower >= low - 1e-12
    assert cert.to_json()["lower_witness"]["kind"] in ("slice", "sup")


def test_zero_function():
    cert, wit = a_norm_variational(AFn.zeros(cyclic(3), 2))
    assert cert.lower == cert.upper == 0.0


def test_pullback_witness_reproduces_function():
    G = cyclic(3)
    rng = np.random.default_rng(5)
    u = AFn.random(G, 2, rng)
    grids = np.indices((3, 3, 3))
    w = u.values[G.mul[grids[0], G.inv[grids[1]]], G.mul[grids[1], G.inv[grids[2]]]]
    # a naive exact chain for the substituted tensor: first block picks x_1, last carries the rest
    first = np.zeros((3, 1, 3), dtype=complex)
    first[np.arange(3), 0, np.arange(3)] = 1
    mid = np.zeros((3, 3, 9), dtype=complex)
    for y in range(3):
        for a in range(3):
            mid[y, a, a * 3 + y] = 1
    last = w.reshape(9, 3).T[:, :, None].copy()
    F = OpFactorization((first, mid, last))
    assert np.allclose(F.evaluate_array(), w)
    wit = pullback_witness(G, F)
    assert wit.residual(u) <= 1e-12
    assert wit.value() <= F.bound() + 1e-12


def test_witness_json_roundtrip():
    G = symmetric(3)
    u = AFn.random(G, 1, np.random.default_rng(1))
    _, wit = a_norm_variational(u)
    back = RepWitness.from_json(G, wit.to_json())
    assert np.allclose(back.evaluate().values, u.values, atol=1e-10)


def test_theta_embed():
    G = cyclic(2)
    assert np.array_equal(theta_embed(AFn.const(G, 1), 3).values, np.ones((2, 2, 2)))
    v = AFn.random(G, 1, np.random.default_rng(0))
    assert np.array_equal(theta_embed(v, 1).values, v.values)
    d = theta_embed(AFn.point_mass(G, (0,)), 2)
    assert np.array_equal(d.values.real, [[1, 0], [0, 1]])
    with pytest.raises(ArityMismatch):
        theta_embed(AFn.const(G, 2), 2)


def test_multiplier_apply_and_operator():
    G = symmetric(3)
    one = AFn.const(G, 2, 1.0)
    for x in itertools.product(range(6), repeat=2):
        c, g = multiplier_apply(one, x)
        assert c == 1 and g == G.mul[x[0], x[1]]
    d = AFn.point_mass(G, (1, 2))
    for x in itertools.product(range(6), repeat=2):
        op = multiplier_operator(d, x)
        assert (np.count_nonzero(op) == 0) == (x != (1, 2))


def test_multiplier_conv_examples():
    G = cyclic(2)
    rng = np.random.default_rng(0)
    u1, f = AFn.random(G, 1, rng), MultiFn.random(G, 1, rng)
    assert np.allclose(multiplier_conv(u1, [f]).values, f.values * u1.values)
    d = MultiFn.point_mass(G, (0,))
    g = multiplier_conv(AFn.const(G, 2, 1.0), [d, d])
    assert np.allclose(g.values, [0.5, 0])
    S = symmetric(3)
    f1, f2 = MultiFn.random(S, 1, rng), MultiFn.random(S, 1, rng)
    conv = np.array([sum(f1.values[y] * f2.values[S.mul[S.inv[y], x]] for y in range(6)) / 6 for x in range(6)])
    assert np.allclose(multiplier_conv(AFn.const(S, 2, 1.0), [f1, f2]).values, conv)


@given(st.integers(0, 2**32 - 1))
def test_multiplier_conv_bilinear(seed):
    G = symmetric(3)
    rng = np.random.default_rng(seed)
    u = AFn.random(G, 2, rng)
    f, g, h = (MultiFn.random(G, 1, rng) for _ in range(3))
    lhs = multiplier_conv(u, [f + 2 * g, h]).values
    rhs = multiplier_conv(u, [f, h]).values + 2 * multiplier_conv(u, [g, h]).values
    assert np.allclose(lhs, rhs)
