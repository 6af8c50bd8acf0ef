"""Elements of V^n(G), the (n+1)-fold Haagerup tensor power of C(G).

A :class:`VFn` stores dense values on ``G^(n+1)`` and optionally a
factorization witness. ``T_w`` is the multilinear operator
``(S_1, ..., S_n) -> sum_i M(phi^1_i) S_1 M(phi^2_i) ... S_n M(phi^(n+1)_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GroupMismatch, ShapeMismatch
from .factorization import HaagFactorization, OpFactorization, product_factorization, reduce_rank
from .group import FiniteGroup, MultiFn, right_translation_index
from .norms import NormCertificate, haagerup_norm, t_w_apply_dense, tw_level1_lower

__all__ = [
    "VFn",
    "HaagFactorization",
    "OpFactorization",
    "evaluate",
    "factorization_bound",
    "product_factorization",
    "reduce_rank",
    "t_w_apply",
    "t_w_apply_dense",
    "t_w_norm_lower",
    "translate",
    "translate_factorization",
    "module_action",
    "v_norm",
]


@dataclass(frozen=True, eq=False)
class VFn(MultiFn):
    """A function on ``G^(n+1)`` with an optional factorization and certificate."""

    factorization: HaagFactorization | OpFactorization | None = None
    certificate: NormCertificate | None = None

    def __post_init__(self):
        super().__post_init__()
        F = self.factorization
        if F is not None:
            if F.shape != self.values.shape:
                raise ShapeMismatch(f"factorization shape {F.shape} vs values {self.values.shape}")
            if np.max(np.abs(F.evaluate_array() - self.values)) > 1e-10 * max(1.0, float(np.max(np.abs(self.values)))):
                raise ShapeMismatch("attached factorization does not reproduce the values")

    def _like(self, values):
        return VFn(self.group, values)

    @classmethod
    def of(cls, w: MultiFn) -> "VFn":
        return w if isinstance(w, VFn) else cls(w.group, w.values)

    @classmethod
    def from_factorization(cls, F: HaagFactorization, group: FiniteGroup | None = None) -> "VFn":
        G = group or F.group
        return cls(G, F.evaluate_array(), F)

    @property
    def n(self) -> int:
        return self.arity - 1


def evaluate(F: HaagFactorization | OpFactorization, group: FiniteGroup | None = None) -> MultiFn:
    """``w(x) = sum_i prod_k phi^k_i(x_k)``."""
    G = group or getattr(F, "group", None)
    vals = F.evaluate_array()
    return MultiFn(G, vals) if G is not None else vals


def factorization_bound(F: HaagFactorization | OpFactorization) -> float:
    return F.bound()


def t_w_apply(F: HaagFactorization, ops: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_i M(phi^1_i) S_1 M(phi^2_i) ... S_n M(phi^(n+1)_i)`` from the factorization."""
    if F.arity < 2 or len(ops) != F.arity - 1:
        raise ShapeMismatch(f"a factorization of arity {F.arity} takes {F.arity - 1} operators, got {len(ops)}")
    shape = F.shape
    for k, S in enumerate(ops):
        if np.shape(S) != (shape[k], shape[k + 1]):
            raise ShapeMismatch(f"operator {k} has shape {np.shape(S)}, expected {(shape[k], shape[k + 1])}")
    out = np.zeros((shape[0], shape[-1]), dtype=complex)
    for i in range(F.rank):
        T = F.columns[0][i][:, None] * np.asarray(ops[0], dtype=complex)
        for k in range(1, F.arity - 1):
            T = (T * F.columns[k][i][None, :]) @ ops[k]
        out += T * F.columns[-1][i][None, :]
    return out


def _dense(w) -> np.ndarray:
    if isinstance(w, (HaagFactorization, OpFactorization)):
        return w.evaluate_array()
    if isinstance(w, MultiFn):
        return np.asarray(w.values)
    return np.asarray(w, dtype=complex)


def t_w_norm_lower(w, group: FiniteGroup | None = None, samples: int = 8, seed: int = 0) -> float:
    """Level-one sampled lower bound ``max ||T_w(S)||`` over contractions.

    Always includes every tuple of left translations when ``group`` is known
    (or attached to ``w``), identities, and ``samples`` random unitaries.
    """
    if group is None:
        group = getattr(w, "group", None)
    val, _ = tw_level1_lower(_dense(w), group=group, samples=samples, seed=seed)
    return val


def v_norm(w, **kw) -> NormCertificate:
    """Certified ``||w||_V``; a factorization attached to ``w`` is used as a warm start."""
    group = getattr(w, "group", None)
    warm = kw.pop("warm_start", None)
    if warm is None and isinstance(w, VFn):
        warm = w.factorization
    if isinstance(w, HaagFactorization):
        warm = warm or w
    return haagerup_norm(_dense(w), warm_start=warm, group=group, **kw)


def translate_factorization(x: int, F: HaagFactorization) -> HaagFactorization:
    G = F.group
    cols = tuple(c[:, G.mul[:, x]] for c in F.columns)
    return HaagFactorization(cols, G)


def translate(x: int, w: MultiFn) -> VFn:
    """``(x . w)(x_1, ..., x_k) = w(x_1 x, ..., x_k x)``; translates an attached factorization column-wise."""
    G = w.group
    vals = w.values[right_translation_index(G, w.arity, x)]
    F = getattr(w, "factorization", None)
    if isinstance(F, HaagFactorization):
        return VFn(G, vals, translate_factorization(x, F))
    return VFn(G, vals)


def module_action(f: MultiFn, w: MultiFn) -> VFn:
    """``f . w = |G|^-1 sum_x f(x) (x . w)``."""
    if f.group != w.group:
        raise GroupMismatch(f"{f.group.name} vs {w.group.name}")
    if f.arity != 1:
        raise ShapeMismatch("the acting function must have one variable")
    G = w.group
    out = np.zeros_like(w.values)
    for x in range(G.order):
        c = f.values[x] / G.order
        if c != 0:
            out = out + c * w.values[right_translation_index(G, w.arity, x)]
    return VFn(G, out)
