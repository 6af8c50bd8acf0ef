"""Transfer between A^n(G) and V^n(G): averaging, substitution, ideals and dual modules.

``N`` sends ``u`` on ``G^n`` to ``u o theta`` on ``G^(n+1)`` with
``theta(x) = (x_1 x_2^-1, ..., x_n x_(n+1)^-1)``. Its image is the set of
functions invariant under the diagonal right action, and ``P`` averages over
that action. ``Q = N^-1 o P``.

Dual spaces are identified with functions through the normalized pairing
``<u, T> = |G|^-k sum u t`` (no conjugation), so module actions are pointwise
products and the adjoint of a linear map ``L`` has representative matrix
``(c_W / c_V) L^T``.

Orbits of the right action are free; every orbit has exactly one point with
last coordinate ``e``. Averages are computed once per orbit and broadcast, so
invariance of outputs holds bit for bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import null_space

from .errors import ArityMismatch, GroupMismatch, IndexOutOfRange, NotInvariant, SchemaError
from .factorization import HaagFactorization, OpFactorization
from .fourier import AFn, RepWitness
from .group import FiniteGroup, MultiFn, TupleIndex, build_group, right_translation_index
from .reps import GroupDual, Irrep, dual_of
from .varopoulos import VFn

SUBSPACE_TOL = 1e-10


# ---------------------------------------------------------------------------
# index maps


@lru_cache(maxsize=64)
def _theta_flat(G: FiniteGroup, n: int) -> np.ndarray:
    """Flat ``G^n`` index of ``theta(z)`` for every flat ``z`` in ``G^(n+1)``."""
    grids = np.indices((G.order,) * (n + 1)).reshape(n + 1, -1)
    out = np.zeros(grids.shape[1], dtype=np.intp)
    for k in range(n):
        out = out * G.order + G.mul[grids[k], G.inv[grids[k + 1]]]
    return out


@lru_cache(maxsize=64)
def _orbit_rep_flat(G: FiniteGroup, k: int) -> np.ndarray:
    """For each flat ``z`` in ``G^k``, the flat index of ``z z_k^-1`` (last coordinate ``e``)."""
    grids = np.indices((G.order,) * k).reshape(k, -1)
    last_inv = G.inv[grids[-1]]
    out = np.zeros(grids.shape[1], dtype=np.intp)
    for j in range(k):
        out = out * G.order + G.mul[grids[j], last_inv]
    return out


@lru_cache(maxsize=64)
def _orbit_members(G: FiniteGroup, k: int) -> np.ndarray:
    """``(|G|^(k-1), |G|)`` flat indices: row ``r`` lists ``rep_r x`` for ``x`` in ``G``.

    Representatives are the tuples ending in ``e``, ordered by their first
    ``k - 1`` coordinates.
    """
    heads = np.indices((G.order,) * (k - 1)).reshape(k - 1, -1) if k > 1 else np.zeros((0, 1), dtype=np.intp)
    out = np.zeros((heads.shape[1], G.order), dtype=np.intp)
    for x in range(G.order):
        idx = np.zeros(heads.shape[1], dtype=np.intp)
        for j in range(k - 1):
            idx = idx * G.order + G.mul[heads[j], x]
        out[:, x] = idx * G.order + x
    return out


def _rep_row(G: FiniteGroup, k: int) -> np.ndarray:
    """Row of :func:`_orbit_members` for each flat point of ``G^k``."""
    return _orbit_rep_flat(G, k) // G.order


def theta_n(x: Sequence[int], G: FiniteGroup) -> tuple[int, ...]:
    """``(x_1 x_2^-1, ..., x_n x_(n+1)^-1)``."""
    x = tuple(int(c) for c in x)
    TupleIndex(G.order, len(x)).flatten(x)
    if len(x) < 2:
        raise ArityMismatch("theta needs at least two coordinates")
    return tuple(int(G.mul[x[k], G.inv[x[k + 1]]]) for k in range(len(x) - 1))


def _check_group(*fns: MultiFn):
    G = fns[0].group
    for f in fns[1:]:
        if f.group != G:
            raise GroupMismatch(f"{G.name} vs {f.group.name}")
    return G


# ---------------------------------------------------------------------------
# P, N, N^-1, Q


def is_invariant(w: MultiFn, tol: float = 0.0) -> bool:
    """Whether ``w(z x) = w(z)`` for every ``x``; exact when ``tol = 0``."""
    G, k = w.group, w.arity
    for x in range(1, G.order):
        d = np.abs(w.values[right_translation_index(G, k, x)] - w.values)
        if np.max(d, initial=0.0) > tol:
            return False
    return True


def _orbit_sums(flat: np.ndarray, members: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """``|G|^-1 sum_x flat[members[r, x]] weights[r, x]`` accumulated in a fixed order over ``x``."""
    vals = flat[members]
    acc = 0.0
    for x in range(members.shape[1]):
        term = vals[:, x] if weights is None else vals[:, x, None, None] * weights[:, x]
        acc = acc + term
    return acc / members.shape[1]


def P_n(w: MultiFn) -> VFn:
    """``P w (z) = |G|^-1 sum_x w(z_1 x, ..., z_k x)``, computed once per orbit."""
    G, k = w.group, w.arity
    if is_invariant(w):
        return VFn(G, w.values)
    sums = _orbit_sums(w.values.reshape(-1), _orbit_members(G, k))
    out = sums[_rep_row(G, k)]
    return VFn(G, out.reshape(w.values.shape))


def N_n(u: MultiFn, witness: RepWitness | None = None, dual: GroupDual | None = None) -> VFn:
    """``N u (x_1, ..., x_(n+1)) = u(x_1 x_2^-1, ..., x_n x_(n+1)^-1)``.

    With a representation witness of ``u`` the result carries a factorization
    whose bound equals the witness value: column families for one variable,
    a matrix chain otherwise.
    """
    G, n = u.group, u.arity
    vals = u.values.reshape(-1)[_theta_flat(G, n)].reshape((G.order,) * (n + 1))
    F = None
    if witness is not None:
        F = n_factorization(witness, dual)
    return VFn(G, vals, F)


def n_factorization(witness: RepWitness, dual: GroupDual | None = None):
    """Factorization of ``N u`` from ``u = g^* L(x_1) A_1 ... L(x_n) f``.

    ``N u(x) = [g^* L(x_1)] [L(x_2)^* A_1 L(x_2)] ... [L(x_(n+1))^* f]``; every block
    is an isometric conjugate of a witness factor, so the bound is the witness value.
    """
    G, m = witness.group, witness.multiplicity
    lift = np.stack([witness.lifted(x) for x in range(G.order)]).astype(complex)
    g = witness.g.reshape(-1)
    f = witness.f.reshape(-1)
    rows = np.einsum("i,xij->xj", g.conj(), lift)  # (X, D)
    cols = np.einsum("xji,j->xi", lift.conj(), f)  # L(x)^* f
    if witness.arity == 1:
        dual = dual or dual_of(G)
        U = np.kron(dual.peter_weyl_basis / np.sqrt(G.order), np.eye(m))
        return HaagFactorization(((rows @ U).T, (U.conj().T @ cols.T)), G)
    blocks = [rows[:, None, :]]
    for A in witness.middles:
        blocks.append(np.einsum("xji,jk,xkl->xil", lift.conj(), A, lift))
    blocks.append(cols[:, :, None])
    return OpFactorization(tuple(blocks))


def N_n_inverse(w: MultiFn) -> AFn:
    """``u(x_1, ..., x_n) = w(e, x_1^-1, x_2^-1 x_1^-1, ..., x_n^-1 ... x_1^-1)``; ``w`` must be invariant."""
    if not is_invariant(w):
        raise NotInvariant("N^-1 is only defined on invariant functions")
    G, k = w.group, w.arity
    n = k - 1
    grids = np.indices((G.order,) * n).reshape(n, -1)
    prefix = np.zeros(grids.shape[1], dtype=np.intp)
    idx = np.zeros(grids.shape[1], dtype=np.intp)  # first coordinate e
    for j in range(n):
        prefix = G.mul[prefix, grids[j]]
        idx = idx * G.order + G.inv[prefix]
    return AFn(G, w.values.reshape(-1)[idx].reshape((G.order,) * n))


def Q_n(w: MultiFn) -> AFn:
    """``N^-1 o P``."""
    return N_n_inverse(P_n(w))


def Q_n_direct(w: MultiFn) -> AFn:
    """``Q w (x) = |G|^-1 sum_g w(g, x_1^-1 g, x_2^-1 x_1^-1 g, ...)``, summed directly."""
    G, k = w.group, w.arity
    n = k - 1
    grids = np.indices((G.order,) * n).reshape(n, -1)
    acc = np.zeros(grids.shape[1], dtype=complex)
    flat = w.values.reshape(-1)
    for g in range(G.order):
        prefix_inv = np.full(grids.shape[1], g, dtype=np.intp)
        idx = np.full(grids.shape[1], g, dtype=np.intp)
        for j in range(n):
            prefix_inv = G.mul[G.inv[grids[j]], prefix_inv]
            idx = idx * G.order + prefix_inv
        acc += flat[idx]
    return AFn(G, (acc / G.order).reshape((G.order,) * n))


# ---------------------------------------------------------------------------
# closed sets and E*


@dataclass(frozen=True)
class ClosedSet:
    """A subset of ``G^k`` stored as sorted flat indices."""

    order: int
    arity: int
    indices: tuple[int, ...]

    def __post_init__(self):
        size = self.order**self.arity
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if idx and (idx[0] < 0 or idx[-1] >= size):
            raise IndexOutOfRange(f"flat indices must lie in 0..{size - 1}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_tuples(cls, G: FiniteGroup, tuples: Iterable[Sequence[int]], arity: int | None = None) -> "ClosedSet":
        tuples = [tuple(t) for t in tuples]
        k = arity if arity is not None else (len(tuples[0]) if tuples else 1)
        ti = TupleIndex(G.order, k)
        return cls(G.order, k, tuple(ti.flatten(t) for t in tuples))

    @classmethod
    def full(cls, G: FiniteGroup, k: int) -> "ClosedSet":
        return cls(G.order, k, tuple(range(G.order**k)))

    @classmethod
    def empty(cls, G: FiniteGroup, k: int) -> "ClosedSet":
        return cls(G.order, k, ())

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "ClosedSet":
        return cls(mask.shape[0], mask.ndim, tuple(np.flatnonzero(mask.reshape(-1))))

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self):
        return self.size

    def __contains__(self, flat: int) -> bool:
        return int(flat) in set(self.indices)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.order**self.arity, dtype=bool)
        m[list(self.indices)] = True
        return m.reshape((self.order,) * self.arity)

    def tuples(self) -> list[tuple[int, ...]]:
        ti = TupleIndex(self.order, self.arity)
        return [ti.unflatten(i) for i in self.indices]

    def complement(self) -> "ClosedSet":
        return ClosedSet.from_mask(~self.mask())

    def intersect(self, other: "ClosedSet") -> "ClosedSet":
        return ClosedSet.from_mask(self.mask() & other.mask())

    def to_json(self) -> dict:
        return {"arity": self.arity, "tuples": [list(t) for t in self.tuples()]}

    @classmethod
    def from_json(cls, obj: dict, G: FiniteGroup) -> "ClosedSet":
        try:
            k = int(obj["arity"])
            return cls.from_tuples(G, obj["tuples"], arity=k)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad closed-set JSON: {exc}") from None


def all_subsets(G: FiniteGroup, k: int) -> Iterable[ClosedSet]:
    size = G.order**k
    for bits in itertools.product((False, True), repeat=size):
        yield ClosedSet.from_mask(np.array(bits).reshape((G.order,) * k))


def E_star(E: ClosedSet, G: FiniteGroup) -> ClosedSet:
    """``theta^-1(E)`` inside ``G^(n+1)``."""
    if E.order != G.order:
        raise GroupMismatch("set and group have different orders")
    mask = E.mask().reshape(-1)[_theta_flat(G, E.arity)]
    return ClosedSet.from_mask(mask.reshape((G.order,) * (E.arity + 1)))


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True)
class Ideal:
    """An ideal of functions on ``G^k`` determined by vanishing on a set.

    ``kind`` is ``"I"`` (vanishing on ``E``), ``"j"`` (support disjoint from
    ``E``) or ``"J"`` (closure of ``j``; equal to ``j`` on a finite set).
    """

    E: ClosedSet
    kind: str
    algebra: str

    def contains(self, u: MultiFn, tol: float = 0.0) -> bool:
        if u.arity != self.E.arity:
            raise ArityMismatch(f"ideal lives on arity {self.E.arity}, function has arity {u.arity}")
        mask = self.E.mask()
        if self.kind == "I":
            return bool(np.all(np.abs(u.values[mask]) <= tol))
        # j and J: the support (finite, hence closed) misses E
        support = np.abs(u.values) > tol
        return not bool(np.any(support & mask))

    def basis(self) -> np.ndarray:
        """Point masses off ``E`` as rows of a ``(dim, |G|^k)`` array."""
        off = np.flatnonzero(~self.E.mask().reshape(-1))
        B = np.zeros((off.size, self.E.order**self.E.arity))
        B[np.arange(off.size), off] = 1.0
        return B

    @property
    def dim(self) -> int:
        return self.E.order**self.E.arity - self.E.size


def ideal(E: ClosedSet, kind: str = "I", algebra: str = "A") -> Ideal:
    if kind not in ("I", "J", "j"):
        raise ValueError(f"unknown ideal kind {kind!r}")
    if algebra not in ("A", "V"):
        raise ValueError(f"unknown algebra {algebra!r}")
    return Ideal(E, kind, algebra)


def x_ideal(E: ClosedSet, support: ClosedSet, kind: str = "I") -> Ideal:
    """``I^X(E)`` (or ``J^X``) for the dual submodule ``X`` of functionals supported on ``support``.

    Annihilator of ``X`` intersected with ``I(E)^perp``; both are support
    determined, so this is the ideal of functions vanishing on ``support & E``.
    """
    return Ideal(E.intersect(support), "I" if kind == "I" else "J", "A")


def ideal_transfer_check(u: MultiFn, E: ClosedSet) -> dict:
    """Membership of ``u`` in ``I_A(E)``, ``j_A(E)`` against ``N u`` in ``I_V(E*)``, ``j_V(E*)``."""
    G = u.group
    Es = E_star(E, G)
    Nu = N_n(u)
    inA, inV = ideal(E, "I", "A").contains(u), ideal(Es, "I", "V").contains(Nu)
    jA, jV = ideal(E, "j", "A").contains(u), ideal(Es, "j", "V").contains(Nu)
    # supp(N u) & E* == theta^-1(supp(u) & E)
    lhs = (np.abs(Nu.values) > 0) & Es.mask()
    pulled = ((np.abs(u.values) > 0) & E.mask()).reshape(-1)[_theta_flat(G, u.arity)]
    support_ok = bool(np.array_equal(lhs.reshape(-1), pulled))
    return {
        "in_I_A": inA,
        "in_I_V": inV,
        "in_j_A": jA,
        "in_j_V": jV,
        "I_equivalent": inA == inV,
        "j_equivalent": jA == jV,
        "support_identity": support_ok,
        "pass": inA == inV and jA == jV and support_ok,
    }


# ---------------------------------------------------------------------------
# dual pairings and adjoints


class DualElement(MultiFn):
    """A functional on functions of ``G^k`` with representative ``t``: ``<u, T> = |G|^-k sum u t``."""

    def _like(self, values):
        return DualElement(self.group, values)

    @classmethod
    def of(cls, t: MultiFn) -> "DualElement":
        return t if isinstance(t, DualElement) else cls(t.group, t.values)

    def pair(self, u: MultiFn) -> complex:
        if u.arity != self.arity:
            raise ArityMismatch(f"arity {u.arity} vs {self.arity}")
        return complex(np.mean(u.values * self.values))

    def act(self, u: MultiFn) -> "DualElement":
        """``u . T`` with ``<v, u . T> = <v u, T>``."""
        if u.arity != self.arity:
            raise ArityMismatch(f"arity {u.arity} vs {self.arity}")
        return DualElement(self.group, u.values * self.values)


def pairing(u: MultiFn, T: MultiFn) -> complex:
    return DualElement.of(T).pair(u)


@lru_cache(maxsize=32)
def N_matrix(G: FiniteGroup, n: int) -> np.ndarray:
    """0/1 matrix of ``N`` from flat ``G^n`` to flat ``G^(n+1)``."""
    th = _theta_flat(G, n)
    M = np.zeros((th.size, G.order**n))
    M[np.arange(th.size), th] = 1.0
    return M


@lru_cache(maxsize=32)
def P_matrix(G: FiniteGroup, k: int) -> np.ndarray:
    rep = _orbit_rep_flat(G, k)
    same = rep[:, None] == rep[None, :]
    return same / G.order


@lru_cache(maxsize=32)
def Q_matrix(G: FiniteGroup, n: int) -> np.ndarray:
    """``Q[x, z] = |G|^-1 [theta(z) = x]``."""
    return N_matrix(G, n).T / G.order


def N_adjoint(s: MultiFn, n: int) -> DualElement:
    """Representative of ``S o N`` on ``A^n`` from ``s`` on ``G^(n+1)``: ``|G|^-1 N^T s``."""
    G = s.group
    t = N_matrix(G, n).T @ s.values.reshape(-1) / G.order
    return DualElement(G, t.reshape((G.order,) * n))


def Q_adjoint(t: MultiFn) -> DualElement:
    """Representative of ``T o Q`` on ``V^n`` from ``t`` on ``G^n``: ``|G| Q^T t``."""
    G, n = t.group, t.arity
    s = Q_matrix(G, n).T @ t.values.reshape(-1) * G.order
    return DualElement(G, s.reshape((G.order,) * (n + 1)))


def omega_S_compose_N(w: MultiFn, S: MultiFn) -> DualElement:
    """``(w . S) o N`` as a functional on ``A^n``."""
    _check_group(w, S)
    if w.arity != S.arity:
        raise ArityMismatch(f"arity {w.arity} vs {S.arity}")
    return N_adjoint(DualElement(w.group, w.values * S.values), w.arity - 1)


def u_T_compose_Q(u: MultiFn, T: MultiFn) -> DualElement:
    """``(u . T) o N^-1 o P`` as a functional on ``V^n``."""
    _check_group(u, T)
    if u.arity != T.arity:
        raise ArityMismatch(f"arity {u.arity} vs {T.arity}")
    return Q_adjoint(DualElement(u.group, u.values * T.values))


def dual_pairing_ops(u: MultiFn, T: MultiFn, w: MultiFn, S: MultiFn) -> dict:
    """Both composed functionals, from the adjoint matrices and from the closed forms.

    Closed forms: ``(w . S) o N`` has representative ``x -> |G|^-1 sum_{theta z = x} w s (z)`` and
    ``(u . T) o Q`` has representative ``N(u t)``.
    """
    G = _check_group(u, T, w, S)
    a = omega_S_compose_N(w, S)
    b = u_T_compose_Q(u, T)
    n = u.arity
    ws = (w.values * S.values).reshape(-1)
    th = _theta_flat(G, n)
    re = np.bincount(th, weights=ws.real, minlength=G.order**n)
    im = np.bincount(th, weights=ws.imag, minlength=G.order**n)
    closed_a = ((re + 1j * im) / G.order).reshape((G.order,) * n)
    closed_b = N_n(MultiFn(G, u.values * T.values)).values
    return {
        "omega_S_N": a,
        "u_T_Q": b,
        "deviation": float(max(np.max(np.abs(a.values - closed_a)), np.max(np.abs(b.values - closed_b)))),
    }


def lemma51_check(w: MultiFn, T: MultiFn) -> float:
    """Max deviation between ``w . (T o N^-1 o P) o N`` and ``(N^-1 P w) . T``.

    Both sides are evaluated on every ``|G|^n delta_x``, i.e. their representatives are compared.
    """
    G = _check_group(w, T)
    if w.arity != T.arity + 1:
        raise ArityMismatch(f"need arities n+1 and n, got {w.arity} and {T.arity}")
    TQ = Q_adjoint(T)
    lhs = N_adjoint(DualElement(G, w.values * TQ.values), T.arity)
    rhs = DualElement(G, Q_n(w).values * T.values)
    n = T.arity
    basis = np.eye(G.order**n) * G.order**n
    lv = basis @ lhs.values.reshape(-1) / G.order**n
    rv = basis @ rhs.values.reshape(-1) / G.order**n
    return float(np.max(np.abs(lv - rv)))


# ---------------------------------------------------------------------------
# submodules


def _orth(B: np.ndarray) -> np.ndarray:
    if B.size == 0 or B.shape[1] == 0:
        return np.zeros((B.shape[0], 0))
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    return U[:, s > SUBSPACE_TOL * max(1.0, s[0] if s.size else 0.0)]


def support_subspace(S: ClosedSet) -> np.ndarray:
    """Orthonormal basis (columns) of representatives supported on ``S``."""
    size = S.order**S.arity
    B = np.zeros((size, S.size))
    B[list(S.indices), np.arange(S.size)] = 1.0
    return B


def projector(B: np.ndarray) -> np.ndarray:
    return B @ B.conj().T


def subspace_distance(B1: np.ndarray, B2: np.ndarray) -> float:
    return float(np.max(np.abs(projector(B1) - projector(B2)), initial=0.0))


def x_to_v(X: ClosedSet, G: FiniteGroup) -> np.ndarray:
    """``X_{V^n}``: all ``S`` with ``(w . S) o N`` in ``X`` for every point mass ``w``."""
    n = X.arity
    size_v = G.order ** (n + 1)
    off = np.flatnonzero(~X.mask().reshape(-1))
    NT = N_matrix(G, n).T / G.order  # adjoint representative map
    rows = []
    for z in range(size_v):
        # (delta_z . S) o N = NT[:, z] s_z ; its entries off X must vanish
        C = np.zeros((off.size, size_v))
        C[:, z] = NT[off, z]
        rows.append(C)
    C = np.vstack(rows) if rows else np.zeros((0, size_v))
    return null_space(C, rcond=SUBSPACE_TOL) if C.size else np.eye(size_v)


def v_to_a(Y: np.ndarray, G: FiniteGroup, n: int) -> np.ndarray:
    """``Y_{A^n}``: all ``T`` with ``(u . T) o N^-1 o P`` in ``Y`` for every point mass ``u``."""
    size_a = G.order**n
    size_v = G.order ** (n + 1)
    Pperp = np.eye(size_v) - projector(Y) if Y.shape[1] else np.eye(size_v)
    QT = Q_matrix(G, n).T * G.order
    blocks = []
    for x in range(size_a):
        D = np.zeros((size_a, size_a))
        D[x, x] = 1.0
        blocks.append(Pperp @ QT @ D)
    C = np.vstack(blocks)
    return null_space(C, rcond=SUBSPACE_TOL)


def submodule_transfer(X: ClosedSet, G: FiniteGroup) -> dict:
    """Compute ``Y = X_{V^n}`` and ``(X_{V^n})_{A^n}``; compare with ``X`` and with functionals on ``X*``."""
    n = X.arity
    Y = x_to_v(X, G)
    back = v_to_a(Y, G, n)
    Xb = support_subspace(X)
    Ys = support_subspace(E_star(X, G))
    d_round = subspace_distance(back, Xb)
    d_star = subspace_distance(Y, Ys)
    return {
        "dim_X": X.size,
        "dim_Y": int(Y.shape[1]),
        "roundtrip_residual": d_round,
        "Y_vs_star_residual": d_star,
        "Y": Y,
        "roundtrip": back,
        "pass": d_round <= SUBSPACE_TOL and d_star <= SUBSPACE_TOL,
    }


# ---------------------------------------------------------------------------
# constructions with irreducible representations


def omega_pi_constructions(w: MultiFn, pi: Irrep) -> dict:
    """``w^pi(z) = |G|^-1 sum_x w(z x) pi(x)`` and ``w~^pi(z) = pi(z_1) w^pi(z)``.

    Both are summed once per orbit: ``w~^pi`` as ``|G|^-1 sum_{y in orbit} w(y) pi(y_1)``,
    so its invariance is exact, and ``w^pi`` in the same order as :func:`P_n`, so the
    trivial representation reproduces ``P_n`` bit for bit. Entry ``(i, j)`` of ``w^pi``
    equals ``pi_ij . w`` (module action).
    """
    G, k = _check_group(w), w.arity
    if pi.group != G:
        raise GroupMismatch(f"{pi.group.name} vs {G.name}")
    flat = w.values.reshape(-1)
    d = pi.dim
    members = _orbit_members(G, k)
    rows = _rep_row(G, k)
    # w^pi(r y) = pi(y)^* S_r with S_r summed over the orbit of r
    S = _orbit_sums(flat, members, np.broadcast_to(pi.matrices, (members.shape[0],) + pi.matrices.shape))
    last = np.arange(flat.size) % G.order
    wpi = np.einsum("zji,zjk->zik", pi.matrices[last].conj(), S[rows])
    first = members // G.order ** (k - 1)  # first coordinate of each orbit member
    wt = _orbit_sums(flat, members, pi.matrices[first])[rows]
    shape = (G.order,) * k
    z1 = np.indices(shape).reshape(k, -1)[0]
    recon = np.einsum("zji,zjk->zik", pi.matrices[z1].conj(), wt)
    return {
        "omega_pi": wpi.reshape(shape + (d, d)),
        "omega_tilde_pi": wt.reshape(shape + (d, d)),
        "reconstruction_residual": float(np.max(np.abs(recon - wpi))),
        "entries": [[VFn(G, wpi[:, i, j].reshape(shape)) for j in range(d)] for i in range(d)],
        "tilde_entries": [[VFn(G, wt[:, i, j].reshape(shape)) for j in range(d)] for i in range(d)],
    }


def resynthesize(w: MultiFn, dual: GroupDual | None = None) -> MultiFn:
    """``sum_pi d_pi tr(pi(z_1)^* w~^pi(z))``, which returns ``w``."""
    G, k = w.group, w.arity
    dual = dual or dual_of(G)
    out = np.zeros(w.values.shape, dtype=complex)
    for p in dual:
        c = omega_pi_constructions(w, p)
        z1 = np.indices(w.values.shape).reshape(k, -1)[0]
        wt = c["omega_tilde_pi"].reshape(-1, p.dim, p.dim)
        out += p.dim * np.einsum("zji,zji->z", p.matrices[z1].conj(), wt).reshape(w.values.shape)
    return MultiFn(G, out)


# ---------------------------------------------------------------------------
# Ditkin-type sequences


def ditkin_transfer(E: ClosedSet, G: FiniteGroup) -> dict:
    """Transfer the constant approximating sequence ``1 - 1_E`` between the algebras.

    Forward: ``u = 1 - 1_E`` lies in ``j_A(E)`` and fixes ``I_A(E)``; ``N u = 1 - 1_{E*}``
    lies in ``j_V(E*)`` and fixes ``I_V(E*)``. Reverse: ``N^-1 P (1 - 1_{E*}) = 1 - 1_E``.
    """
    n = E.arity
    Es = E_star(E, G)
    u = AFn(G, 1.0 - E.mask().astype(float))
    Nu = N_n(u)
    w_seq = VFn(G, 1.0 - Es.mask().astype(float))
    back = Q_n(w_seq)

    def fixes(a: MultiFn, basis: np.ndarray) -> bool:
        shape = a.values.shape
        for row in basis:
            v = row.reshape(shape).astype(complex)
            if not np.array_equal(a.values * v, v):
                return False
        return True

    IA = ideal(E, "I", "A")
    IV = ideal(Es, "I", "V")
    report = {
        "u_in_j_A": ideal(E, "j", "A").contains(u),
        "u_fixes_I_A": fixes(u, IA.basis()),
        "N_u_equals_indicator_complement": bool(np.array_equal(Nu.values, w_seq.values)),
        "N_u_in_j_V": ideal(Es, "j", "V").contains(Nu),
        "N_u_fixes_I_V": fixes(Nu, IV.basis()),
        "reverse_equals_u": bool(np.array_equal(back.values, u.values)),
        "reverse_in_j_A": ideal(E, "j", "A").contains(back),
        "reverse_fixes_I_A": fixes(back, IA.basis()),
    }
    report["pass"] = all(report.values())
    return {"u": u, "omega": w_seq, "reverse": back, "report": report, "arity": n}


def synthesis_degeneracy(E: ClosedSet, G: FiniteGroup) -> dict:
    """``I(E) = J(E)`` in both algebras, compared through predicates and bases.

    On a finite group every set is a set of synthesis, so this always holds;
    failure of synthesis cannot be exhibited at this scale.
    """
    Es = E_star(E, G)
    out = {}
    for name, F, alg in (("A", E, "A"), ("V", Es, "V")):
        I, J, j = ideal(F, "I", alg), ideal(F, "J", alg), ideal(F, "j", alg)
        same_basis = np.array_equal(I.basis(), J.basis()) and np.array_equal(J.basis(), j.basis())
        # predicates agree on every basis vector and on every vector outside
        size = G.order**F.arity
        shape = (G.order,) * F.arity
        probes = [MultiFn(G, row.reshape(shape)) for row in np.eye(size)]
        probes.append(MultiFn(G, (~F.mask()).astype(float)))
        same_pred = all(I.contains(p) == J.contains(p) == j.contains(p) for p in probes)
        out[name] = bool(same_basis and same_pred)
    out["pass"] = out["A"] and out["V"]
    out["note"] = "every closed set of a finite group is a set of synthesis; failure of synthesis is not reproducible here"
    return out
