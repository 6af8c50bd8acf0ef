"""Unitary dual of a finite group, Fourier coefficients and Peter-Weyl projections.

The dual is computed numerically: a random Hermitian matrix averaged over
conjugation by the left regular representation lies in its commutant, and
for a generic seed the eigenspaces of that average are irreducible
subrepresentations. Reducible pieces (eigenvalue collisions) are split
again recursively; classes are then deduplicated by character.

Fourier convention: ``u_hat(pi) = (1/|G|) sum_x u(x) pi(x)^*`` so that
``u(x) = sum_pi d_pi tr(u_hat(pi) pi(x))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BadDualIndex, DimMismatch, GroupMismatch, NumericalDegeneracy, ShapeMismatch
from .group import FiniteGroup, MultiFn

logger = logging.getLogger(__name__)

CLUSTER_TOL = 1e-8
MAX_RESTARTS = 5
MAX_ORDER = 200


@dataclass(frozen=True, eq=False)
class Irrep:
    """An irreducible unitary representation stored as one matrix per element."""

    group: FiniteGroup
    matrices: np.ndarray  # (order, d, d)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @cached_property
    def character(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)

    def __call__(self, x: int) -> np.ndarray:
        return self.matrices[x]

    def is_trivial(self) -> bool:
        return self.dim == 1 and np.allclose(self.character, 1.0, atol=1e-9)

    def homomorphism_residual(self) -> float:
        mul = self.group.mul
        M = self.matrices
        prod = np.einsum("aij,bjk->abik", M, M)
        return float(np.max(np.abs(prod - M[mul])))

    def unitarity_residual(self) -> float:
        M = self.matrices
        eye = np.eye(self.dim)
        return float(np.max(np.abs(np.einsum("aji,ajk->aik", M.conj(), M) - eye)))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "matrices": [[[[float(z.real), float(z.imag)] for z in row] for row in m] for m in self.matrices],
        }


@dataclass(frozen=True, eq=False)
class GroupDual:
    group: FiniteGroup
    irreps: tuple[Irrep, ...]
    seed: int = 0

    def __len__(self):
        return len(self.irreps)

    def __iter__(self):
        return iter(self.irreps)

    def __getitem__(self, i) -> Irrep:
        return self.irreps[i]

    @property
    def dims(self) -> list[int]:
        return [p.dim for p in self.irreps]

    def dimension_count(self) -> int:
        return sum(d * d for d in self.dims)

    def character_table(self) -> np.ndarray:
        return np.stack([p.character for p in self.irreps])

    def schur_orthogonality_residual(self) -> float:
        """Max deviation of ``(1/|G|) sum_x pi_ij(x) conj(sigma_kl(x))`` from ``delta/d_pi``."""
        blocks = [p.matrices.reshape(self.group.order, -1) for p in self.irreps]
        C = np.concatenate(blocks, axis=1)
        gram = C.T @ C.conj() / self.group.order
        expected = np.diag(np.concatenate([np.full(p.dim**2, 1.0 / p.dim) for p in self.irreps]))
        return float(np.max(np.abs(gram - expected)))

    def character_residual(self) -> float:
        X = self.character_table()
        return float(np.max(np.abs(X @ X.conj().T / self.group.order - np.eye(len(self)))))

    @cached_property
    def peter_weyl_basis(self) -> np.ndarray:
        """Orthonormal basis of L^2(G) (normalized inner product) made of ``sqrt(d) pi_ij``.

        Returned as an ``(order, order)`` array whose column ``c`` holds the
        values of the c-th basis function, ordered by irrep then ``(i, j)``.
        """
        cols = [np.sqrt(p.dim) * p.matrices.reshape(self.group.order, -1) for p in self.irreps]
        return np.concatenate(cols, axis=1)

    def to_json(self) -> dict:
        return {"group": self.group.descriptor, "seed": self.seed, "irreps": [p.to_json() for p in self.irreps]}


def _commutant_split(rep: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    """Split a unitary representation ``rep`` (order, D, D) into eigenspaces of a random commutant element.

    Returns a list of ``(D, k)`` isometries spanning invariant subspaces.
    """
    D = rep.shape[1]
    H = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    H = H + H.conj().T
    A = np.sum(rep @ H @ rep.conj().transpose(0, 2, 1), axis=0) / rep.shape[0]
    A = (A + A.conj().T) / 2
    evals, evecs = np.linalg.eigh(A)
    scale = max(1.0, float(np.max(np.abs(evals))))
    pieces, start = [], 0
    for i in range(1, D + 1):
        if i == D or evals[i] - evals[i - 1] > CLUSTER_TOL * scale:
            pieces.append(evecs[:, start:i])
            start = i
    return pieces


def _is_irreducible(sub: np.ndarray) -> bool:
    chi = np.trace(sub, axis1=1, axis2=2)
    return abs(float(np.mean(np.abs(chi) ** 2)) - 1.0) < 1e-6


def _decompose(rep: np.ndarray, rng: np.random.Generator, depth: int = 0) -> list[np.ndarray]:
    if _is_irreducible(rep):
        return [rep]
    for _attempt in range(MAX_RESTARTS):
        pieces = _commutant_split(rep, rng)
        if len(pieces) > 1:
            out = []
            for V in pieces:
                sub = V.conj().T @ rep @ V
                out.extend(_decompose(sub, rng, depth + 1))
            return out
        logger.debug("commutant split failed at depth %d, retrying", depth)
    raise NumericalDegeneracy(f"could not split a representation of dimension {rep.shape[1]}")


def _sort_key(p: Irrep):
    chi = np.round(p.character, 6)
    return (p.dim, tuple((-z.real, -z.imag) for z in chi))


def compute_dual(G: FiniteGroup, seed: int = 0) -> GroupDual:
    """Compute one unitary representative per irreducible class of ``G``.

    Ordering is by dimension, then by character in decreasing lexicographic
    order, so the trivial representation is always first.
    """
    if G.order > MAX_ORDER:
        raise NumericalDegeneracy(f"group of order {G.order} exceeds the soft guard {MAX_ORDER}")
    rng = np.random.default_rng(seed)
    lam = G.regular_stack.astype(complex)
    for _attempt in range(MAX_RESTARTS):
        found: list[Irrep] = []
        for sub in _decompose(lam, rng):
            chi = np.trace(sub, axis1=1, axis2=2)
            if not any(np.max(np.abs(chi - p.character)) < 1e-6 for p in found):
                found.append(Irrep(G, sub))
        if sum(p.dim**2 for p in found) == G.order:
            break
        logger.debug("dimension count mismatch, restarting dual computation")
    else:
        raise NumericalDegeneracy("dual computation did not reach sum d^2 = |G|")
    irreps = tuple(sorted(found, key=_sort_key))
    for p in irreps:
        mats = p.matrices.copy()
        if p.dim == 1 and np.allclose(mats, 1.0, atol=1e-9):
            mats[:] = 1.0  # the trivial representation is stored exactly
        mats.setflags(write=False)
        object.__setattr__(p, "matrices", mats)
    return GroupDual(G, irreps, seed)


_DUAL_CACHE: dict[tuple[int, int], GroupDual] = {}


def dual_of(G: FiniteGroup, seed: int = 0) -> GroupDual:
    """Cached :func:`compute_dual`."""
    key = (hash(G), seed)
    if key not in _DUAL_CACHE:
        _DUAL_CACHE[key] = compute_dual(G, seed)
    return _DUAL_CACHE[key]


def _fn1(u) -> MultiFn:
    if not isinstance(u, MultiFn) or u.arity != 1:
        raise ShapeMismatch("expected a function of one variable")
    return u


def fourier_coefficient(u: MultiFn, pi: Irrep) -> np.ndarray:
    u = _fn1(u)
    if u.group != pi.group:
        raise GroupMismatch(f"{u.group.name} vs {pi.group.name}")
    return np.einsum("x,xji->ij", u.values, pi.matrices.conj()) / u.group.order


def fourier_transform(u: MultiFn, dual: GroupDual) -> list[np.ndarray]:
    return [fourier_coefficient(u, p) for p in dual]


def inverse_fourier(coeffs: Sequence[np.ndarray], dual: GroupDual) -> MultiFn:
    if len(coeffs) != len(dual):
        raise ShapeMismatch(f"need {len(dual)} coefficient blocks, got {len(coeffs)}")
    vals = np.zeros(dual.group.order, dtype=complex)
    for c, p in zip(coeffs, dual):
        c = np.asarray(c, dtype=complex)
        if c.shape != (p.dim, p.dim):
            raise ShapeMismatch(f"coefficient of shape {c.shape} for an irrep of dim {p.dim}")
        vals += p.dim * np.einsum("ij,xji->x", c, p.matrices)
    return MultiFn(dual.group, vals)


def project_PF(f: MultiFn, F: Iterable[int], dual: GroupDual) -> MultiFn:
    """Orthogonal projection of ``f`` onto the span of coefficient functions of the irreps in ``F``."""
    f = _fn1(f)
    F = sorted(set(F))
    if any(not 0 <= i < len(dual) for i in F):
        raise BadDualIndex(f"dual indices {F} out of range 0..{len(dual) - 1}")
    coeffs = [fourier_coefficient(f, p) if i in F else np.zeros((p.dim, p.dim)) for i, p in enumerate(dual)]
    return inverse_fourier(coeffs, dual)


def coefficient_function(pi: Irrep, u, v) -> MultiFn:
    """``x -> <pi(x) u, v>``."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != (pi.dim,) or v.shape != (pi.dim,):
        raise DimMismatch(f"vectors must have dimension {pi.dim}")
    return MultiFn(pi.group, np.einsum("i,xij,j->x", v.conj(), pi.matrices, u))


def left_translate(f: MultiFn, x: int) -> MultiFn:
    """``(lambda(x) f)(y) = f(x^-1 y)``."""
    G = f.group
    return MultiFn(G, f.values[G.mul[G.inv[x]]])
