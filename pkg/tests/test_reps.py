import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varopkit.errors import BadDualIndex, DimMismatch, GroupMismatch, ShapeMismatch
from varopkit.group import MultiFn, build_group, cyclic, haar_pair, quaternion8, symmetric
from varopkit.reps import (
    coefficient_function,
    compute_dual,
    dual_of,
    fourier_coefficient,
    fourier_transform,
    inverse_fourier,
    left_translate,
    project_PF,
)

groups = st.sampled_from(["c2", "c3", "c5", "s3", "d4", "q8", "c2xc2", "d5", "s4"])


@given(groups)
def test_irrep_invariants(desc):
    G = build_group(desc)
    dual = dual_of(G)
    assert sum(d * d for d in dual.dims) == G.order
    for p in dual:
        assert np.allclose(p(0), np.eye(p.dim), atol=1e-10)
        assert p.homomorphism_residual() <= 1e-10
        assert p.unitarity_residual() <= 1e-10
    chars = [MultiFn(G, p.character) for p in dual]
    gram = np.array([[haar_pair(a, b) for b in chars] for a in chars])
    assert np.allclose(gram, np.eye(len(chars)), atol=1e-8)
    assert dual[0].is_trivial()


def test_dims_examples():
    d2 = dual_of(cyclic(2))
    assert d2.dims == [1, 1]
    assert np.allclose(d2[1].character, [1, -1])
    assert sorted(dual_of(symmetric(3)).dims) == [1, 1, 2]
    assert sorted(dual_of(quaternion8()).dims) == [1, 1, 1, 1, 2]


def test_character_table_s3_against_known_values():
    G = symmetric(3)
    dual = dual_of(G)
    # class of an element determined by its order: 1 (identity), 2 (transposition), 3 (3-cycle)
    order = []
    for x in range(G.order):
        y, k = x, 1
        while y != 0:
            y, k = G.mul[y, x], k + 1
        order.append(k)
    known = {1: {1: 1, 2: 1, 3: 1}, -1: {1: 1, 2: -1, 3: 1}, 2: {1: 2, 2: 0, 3: -1}}
    for p in dual:
        key = 2 if p.dim == 2 else int(round(p.character[order.index(2)].real))
        expect = [known[key][o] for o in order]
        assert np.allclose(p.character, expect, atol=1e-9)


def test_dual_is_deterministic():
    a = compute_dual(symmetric(3), seed=5)
    b = compute_dual(symmetric(3), seed=5)
    for p, q in zip(a, b):
        assert np.array_equal(p.matrices, q.matrices)


def test_fourier_examples():
    G = symmetric(3)
    dual = dual_of(G)
    one = MultiFn.const(G, 1, 1.0)
    coeffs = fourier_transform(one, dual)
    assert np.allclose(coeffs[0], 1)
    assert all(np.allclose(c, 0) for c in coeffs[1:])
    delta = MultiFn.point_mass(G, (0,))
    for c, p in zip(fourier_transform(delta, dual), dual):
        assert np.allclose(c, np.eye(p.dim) / G.order)
    assert np.allclose(inverse_fourier([np.eye(p.dim) / G.order for p in dual], dual).values, delta.values)
    assert np.allclose(inverse_fourier([np.zeros((p.dim, p.dim)) for p in dual], dual).values, 0)
    c = [np.full((1, 1), 2.5)] + [np.zeros((p.dim, p.dim)) for p in list(dual)[1:]]
    assert np.allclose(inverse_fourier(c, dual).values, 2.5)


def test_fourier_roundtrip_s3():
    G = symmetric(3)
    dual = dual_of(G)
    rng = np.random.default_rng(0)
    for _ in range(20):
        u = MultiFn.random(G, 1, rng)
        assert np.max(np.abs(inverse_fourier(fourier_transform(u, dual), dual).values - u.values)) <= 1e-10


@given(groups, st.integers(0, 2**32 - 1))
def test_fourier_linear_and_plancherel(desc, seed):
    G = build_group(desc)
    dual = dual_of(G)
    rng = np.random.default_rng(seed)
    u, v = MultiFn.random(G, 1, rng), MultiFn.random(G, 1, rng)
    a = 0.3 - 1.2j
    for p in dual:
        assert np.allclose(fourier_coefficient(u + a * v, p), fourier_coefficient(u, p) + a * fourier_coefficient(v, p))
    # Plancherel with normalized Haar measure
    total = sum(p.dim * np.sum(np.abs(fourier_coefficient(u, p)) ** 2) for p in dual)
    assert total == pytest.approx(haar_pair(u, u).real)


def test_fourier_errors():
    G = cyclic(3)
    with pytest.raises(GroupMismatch):
        fourier_coefficient(MultiFn.const(cyclic(2), 1), dual_of(G)[0])
    with pytest.raises(ShapeMismatch):
        inverse_fourier([np.zeros((1, 1))], dual_of(G))
    with pytest.raises(ShapeMismatch):
        inverse_fourier([np.zeros((2, 2))] * 3, dual_of(G))


@given(groups, st.integers(0, 2**32 - 1), st.data())
def test_project_PF_properties(desc, seed, data):
    G = build_group(desc)
    dual = dual_of(G)
    rng = np.random.default_rng(seed)
    F = data.draw(st.sets(st.integers(0, len(dual) - 1)))
    f, g = MultiFn.random(G, 1, rng), MultiFn.random(G, 1, rng)
    Pf = project_PF(f, F, dual)
    assert np.allclose(project_PF(Pf, F, dual).values, Pf.values, atol=1e-10)
    assert haar_pair(Pf, g) == pytest.approx(haar_pair(f, project_PF(g, F, dual)))
    x = data.draw(st.integers(0, G.order - 1))
    assert np.max(np.abs(project_PF(left_translate(f, x), F, dual).values - left_translate(Pf, x).values)) <= 1e-10


def test_project_PF_examples():
    G = symmetric(3)
    dual = dual_of(G)
    f = MultiFn.random(G, 1, np.random.default_rng(2))
    assert np.allclose(project_PF(f, range(len(dual)), dual).values, f.values)
    assert np.allclose(project_PF(f, [0], dual).values, np.mean(f.values))
    assert np.allclose(project_PF(f, [], dual).values, 0)
    with pytest.raises(BadDualIndex):
        project_PF(f, [7], dual)


def test_coefficient_functions():
    G = cyclic(2)
    dual = dual_of(G)
    assert np.allclose(coefficient_function(dual[0], [1], [1]).values, 1)
    assert np.allclose(coefficient_function(dual[1], [1], [1]).values, [1, -1])
    S = symmetric(3)
    ds = dual_of(S)
    two = [p for p in ds if p.dim == 2][0]
    c = coefficient_function(two, [1, 0], [1, 0])
    assert c(0) == pytest.approx(1)
    idx = list(ds).index(two)
    assert np.allclose(project_PF(c, [idx], ds).values, c.values, atol=1e-10)
    with pytest.raises(DimMismatch):
        coefficient_function(two, [1], [1, 0])
