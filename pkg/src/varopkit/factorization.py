"""Finite factorizations of multivariate tensors.

Two shapes are used. A column-family factorization writes
``w(x_1, ..., x_N) = sum_i phi^1_i(x_1) ... phi^N_i(x_N)`` and is bounded by the
product of column sup-norms ``prod_k ||sum_i |phi^k_i|^2||_inf^(1/2)``. A matrix-chain
factorization writes ``w = A_1(x_1) A_2(x_2) ... A_N(x_N)`` with row, matrix and
column blocks, bounded by ``prod_k max_x ||A_k(x)||_op``. Both bounds dominate the
Haagerup tensor norm of ``w`` in ``C(X_1) x_h ... x_h C(X_N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import qr

from .errors import ArityMismatch, SchemaError, ShapeMismatch
from .group import FiniteGroup, MultiFn, build_group


def _cjson(a: np.ndarray):
    a = np.asarray(a)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_cjson(x) for x in a]


def _cparse(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.shape[-1:] != (2,):
        raise SchemaError("complex arrays are encoded as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class HaagFactorization:
    """Column families ``columns[k]`` of shape ``(rank, |X_k|)``.

    ``group`` is optional; when set, all ``X_k`` are the group and
    :meth:`evaluate` returns a :class:`MultiFn`.
    """

    columns: tuple[np.ndarray, ...]
    group: FiniteGroup | None = None

    def __post_init__(self):
        cols = tuple(np.array(c, dtype=complex) for c in self.columns)
        if len(cols) < 1:
            raise ShapeMismatch("a factorization needs at least one column family")
        r = cols[0].shape[0]
        for c in cols:
            if c.ndim != 2 or c.shape[0] != r:
                raise ShapeMismatch("every column family must have shape (rank, |X_k|)")
            if self.group is not None and c.shape[1] != self.group.order:
                raise ShapeMismatch(f"column length {c.shape[1]} does not match |G| = {self.group.order}")
            c.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @classmethod
    def from_functions(cls, families: Sequence[Sequence[MultiFn]]) -> "HaagFactorization":
        """Build from ``families[k][i] = phi^k_i`` given as arity-1 functions."""
        G = families[0][0].group
        cols = [np.stack([f.values for f in fam]) for fam in families]
        return cls(tuple(cols), G)

    @classmethod
    def ones(cls, G: FiniteGroup, arity: int) -> "HaagFactorization":
        return cls(tuple(np.ones((1, G.order)) for _ in range(arity)), G)

    @property
    def arity(self) -> int:
        return len(self.columns)

    @property
    def rank(self) -> int:
        return self.columns[0].shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.columns)

    def evaluate_array(self) -> np.ndarray:
        out = self.columns[0]
        for c in self.columns[1:]:
            out = out[..., None] * c.reshape((c.shape[0],) + (1,) * (out.ndim - 1) + (c.shape[1],))
        return out.sum(axis=0)

    def evaluate(self):
        vals = self.evaluate_array()
        return MultiFn(self.group, vals) if self.group is not None else vals

    def column_norms(self) -> np.ndarray:
        return np.array([np.sqrt(np.max(np.sum(np.abs(c) ** 2, axis=0))) for c in self.columns])

    def bound(self) -> float:
        return float(np.prod(self.column_norms()))

    def scaled(self, k: int, c: complex) -> "HaagFactorization":
        cols = list(self.columns)
        cols[k] = cols[k] * c
        return HaagFactorization(tuple(cols), self.group)

    def to_op(self) -> "OpFactorization":
        """Equivalent chain with diagonal middle blocks."""
        N, r = self.arity, self.rank
        if N == 1:
            return OpFactorization((self.columns[0].sum(axis=0)[:, None, None],))
        blocks = [self.columns[0].T[:, None, :]]
        for c in self.columns[1:-1]:
            mid = np.zeros((c.shape[1], r, r), dtype=complex)
            mid[:, np.arange(r), np.arange(r)] = c.T
            blocks.append(mid)
        blocks.append(self.columns[-1].T[:, :, None])
        return OpFactorization(tuple(blocks))

    def to_json(self) -> dict:
        out = {"arity": self.arity, "rank": self.rank, "columns": [_cjson(c) for c in self.columns]}
        if self.group is not None:
            out["group"] = self.group.descriptor
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "HaagFactorization":
        try:
            cols = tuple(_cparse(c) for c in obj["columns"])
            G = build_group(obj["group"]) if "group" in obj else None
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad factorization JSON: {exc}") from None
        if len(cols) != int(obj.get("arity", len(cols))):
            raise SchemaError("arity does not match the number of column families")
        return cls(cols, G)


@dataclass(frozen=True, eq=False)
class OpFactorization:
    """Matrix chain ``blocks[k]`` of shape ``(|X_k|, r_{k-1}, r_k)`` with ``r_0 = r_N = 1``."""

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(np.array(b, dtype=complex) for b in self.blocks)
        if blocks[0].shape[1] != 1 or blocks[-1].shape[2] != 1:
            raise ShapeMismatch("first block must be rows and last block columns")
        for a, b in zip(blocks, blocks[1:]):
            if a.shape[2] != b.shape[1]:
                raise ShapeMismatch(f"bond mismatch {a.shape} -> {b.shape}")
        for b in blocks:
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @property
    def arity(self) -> int:
        return len(self.blocks)

    @property
    def bonds(self) -> tuple[int, ...]:
        return tuple(b.shape[2] for b in self.blocks[:-1])

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.blocks)

    def evaluate_array(self) -> np.ndarray:
        T = self.blocks[0][:, 0, :]
        for B in self.blocks[1:]:
            T = np.tensordot(T, B, axes=([-1], [1]))
        return T[..., 0]

    def block_norms(self) -> np.ndarray:
        return np.array([float(np.max(np.linalg.norm(B, ord=2, axis=(1, 2)))) for B in self.blocks])

    def bound(self) -> float:
        return float(np.prod(self.block_norms()))

    def balanced(self) -> "OpFactorization":
        """Rescale blocks so every block carries the same max operator norm."""
        norms = self.block_norms()
        if np.any(norms == 0):
            return self
        target = float(np.prod(norms)) ** (1.0 / len(norms))
        return OpFactorization(tuple(B * (target / n) for B, n in zip(self.blocks, norms)))

    def to_json(self) -> dict:
        return {"arity": self.arity, "bonds": list(self.bonds), "blocks": [_cjson(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, obj: dict) -> "OpFactorization":
        try:
            return cls(tuple(_cparse(b) for b in obj["blocks"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad factorization JSON: {exc}") from None


def product_factorization(F1: HaagFactorization, F2: HaagFactorization) -> HaagFactorization:
    """Columns ``phi^k_i psi^k_j`` over the product index ``(i, j)``; evaluates to the pointwise product."""
    if F1.arity != F2.arity:
        raise ArityMismatch(f"arity {F1.arity} vs {F2.arity}")
    if F1.shape != F2.shape:
        raise ShapeMismatch(f"shapes {F1.shape} vs {F2.shape}")
    cols = tuple((a[:, None, :] * b[None, :, :]).reshape(-1, a.shape[1]) for a, b in zip(F1.columns, F2.columns))
    return HaagFactorization(cols, F1.group if F1.group is not None else F2.group)


def reduce_rank(F: HaagFactorization, tol: float = 1e-12) -> HaagFactorization:
    """Drop redundant terms by eigen-truncating the Gram matrix of the joint columns.

    Keeps the result only if it re-evaluates to the same tensor within ``1e-10``
    and does not raise the bound.
    """
    if F.arity < 2:
        return F
    # each term's product over all but the last family, flattened
    left = np.stack([np.ravel(HaagFactorization(tuple(c[i : i + 1] for c in F.columns[:-1])).evaluate_array()) for i in range(F.rank)])
    gram = left.conj() @ left.T
    evals, evecs = np.linalg.eigh((gram + gram.conj().T) / 2)
    keep = evals > tol * max(1.0, float(evals.max(initial=0.0)))
    if keep.sum() >= F.rank:
        return F
    _, _, piv = qr(left.T, mode="economic", pivoting=True)
    k = int(keep.sum())
    idx = np.sort(piv[:k])
    coeff, *_ = np.linalg.lstsq(left[idx].T, left.T, rcond=None)  # left.T ~ left[idx].T @ coeff
    last = coeff @ F.columns[-1]
    cols = tuple(c[idx] for c in F.columns[:-1]) + (last,)
    out = HaagFactorization(cols, F.group)
    if np.max(np.abs(out.evaluate_array() - F.evaluate_array()), initial=0.0) > 1e-10 or out.bound() > F.bound():
        return F
    return out
