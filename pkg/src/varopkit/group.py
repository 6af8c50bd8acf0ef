"""Finite groups, tuple indexing on G^k and dense functions on G^k.

A group is stored as a multiplication table over indices ``0..order-1`` with
the identity at index 0. Integrals against Haar measure are normalized sums,
``(1/|G|) sum_x``, so the constant function 1 has mass 1.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    ArityMismatch,
    GroupMismatch,
    IndexOutOfRange,
    SchemaError,
    ShapeMismatch,
    UnsupportedDescriptor,
)

MAX_CYCLIC = 200
MAX_DIHEDRAL = 100
MAX_SYMMETRIC = 5


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its multiplication table.

    Attributes
    ----------
    order : int
    mul : (order, order) int array, ``mul[a, b]`` is the index of ``ab``.
    inv : (order,) int array.
    labels : tuple of str
    descriptor : dict
        JSON-style construction recipe, e.g. ``{"type": "cyclic", "n": 4}``.
    """

    order: int
    mul: np.ndarray
    inv: np.ndarray
    labels: tuple[str, ...]
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mul.setflags(write=False)
        self.inv.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return self.descriptor == other.descriptor and np.array_equal(self.mul, other.mul)

    def __hash__(self):
        return hash(json.dumps(self.descriptor, sort_keys=True))

    def __repr__(self):
        return f"FiniteGroup({describe(self.descriptor)}, order={self.order})"

    @property
    def name(self) -> str:
        return describe(self.descriptor)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def product(self, elements: Iterable[int]) -> int:
        acc = 0
        for g in elements:
            acc = int(self.mul[acc, g])
        return acc

    def product_map(self, k: int) -> np.ndarray:
        """Array of shape ``(order,)*k`` holding the index of ``x_1 x_2 ... x_k``."""
        out = np.zeros((), dtype=np.intp)
        for _ in range(k):
            out = self.mul[out[..., None], np.arange(self.order)]
        return out

    def regular_rep(self, x: int) -> np.ndarray:
        """Matrix of the left regular representation, ``(lambda(x) f)(y) = f(x^-1 y)``."""
        L = np.zeros((self.order, self.order))
        L[self.mul[x], np.arange(self.order)] = 1.0
        return L

    @cached_property
    def regular_stack(self) -> np.ndarray:
        return np.stack([self.regular_rep(x) for x in range(self.order)])

    def validate(self) -> None:
        """Exact integer check of the group axioms; raises ``UnsupportedDescriptor``."""
        n = self.order
        mul = self.mul
        idx = np.arange(n)
        if mul.shape != (n, n):
            raise UnsupportedDescriptor("multiplication table has the wrong shape")
        if not (np.array_equal(mul[0], idx) and np.array_equal(mul[:, 0], idx)):
            raise UnsupportedDescriptor("index 0 is not the identity")
        srt = np.sort(mul, axis=1)
        if not (np.all(srt == idx) and np.all(np.sort(mul, axis=0) == idx[:, None])):
            raise UnsupportedDescriptor("table is not a Latin square")
        left = mul[mul[:, :, None], idx[None, None, :]]
        right = mul[idx[:, None, None], mul[None, :, :]]
        if not np.array_equal(left, right):
            raise UnsupportedDescriptor("table is not associative")
        if not np.all(mul[idx, self.inv] == 0):
            raise UnsupportedDescriptor("inverse table is inconsistent")


def _from_table(mul, labels, descriptor) -> FiniteGroup:
    mul = np.asarray(mul, dtype=np.intp)
    inv = np.argmin(mul, axis=1).astype(np.intp)  # position of the identity 0 in each row
    G = FiniteGroup(len(labels), mul, inv, tuple(labels), descriptor)
    G.validate()
    return G


def cyclic(n: int) -> FiniteGroup:
    if not 1 <= n <= MAX_CYCLIC:
        raise UnsupportedDescriptor(f"cyclic(n) needs 1 <= n <= {MAX_CYCLIC}, got {n}")
    a = np.arange(n)
    labels = ["e"] + [f"r{k}" for k in range(1, n)]
    return _from_table((a[:, None] + a[None, :]) % n, labels, {"type": "cyclic", "n": n})


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n; element ``k + n*j`` is ``r^k s^j``."""
    if not 1 <= n <= MAX_DIHEDRAL:
        raise UnsupportedDescriptor(f"dihedral(n) needs 1 <= n <= {MAX_DIHEDRAL}, got {n}")
    # (r^a s^i)(r^b s^j) = r^(a + (-1)^i b) s^(i+j)
    mul = np.empty((2 * n, 2 * n), dtype=np.intp)
    for i, a, j, b in itertools.product(range(2), range(n), range(2), range(n)):
        k = (a + (b if i == 0 else -b)) % n
        mul[a + n * i, b + n * j] = k + n * ((i + j) % 2)
    labels = ["e"] + [f"r{k}" for k in range(1, n)] + ["s"] + [f"r{k}s" for k in range(1, n)]
    return _from_table(mul, labels, {"type": "dihedral", "n": n})


def symmetric(n: int) -> FiniteGroup:
    """Symmetric group; permutations in lexicographic order, ``(st)(i) = s(t(i))``."""
    if not 1 <= n <= MAX_SYMMETRIC:
        raise UnsupportedDescriptor(f"symmetric(n) needs 1 <= n <= {MAX_SYMMETRIC}, got {n}")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    mul = [[index[tuple(s[t[i]] for i in range(n))] for t in perms] for s in perms]
    labels = ["".join(str(i + 1) for i in p) for p in perms]
    return _from_table(mul, labels, {"type": "symmetric", "n": n})


def quaternion8() -> FiniteGroup:
    # elements as (sign, unit) with unit in 1, i, j, k; index = 2*unit + (sign < 0)
    table = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    mul = np.empty((8, 8), dtype=np.intp)
    for a, b in itertools.product(range(8), repeat=2):
        sa, ua = (-1 if a % 2 else 1), a // 2
        sb, ub = (-1 if b % 2 else 1), b // 2
        s, u = table[(ua, ub)]
        mul[a, b] = 2 * u + (1 if s * sa * sb < 0 else 0)
    labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    return _from_table(mul, labels, {"type": "quaternion8"})


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """``G x H`` with ``(a, b)`` stored at index ``a*|H| + b``."""
    n, m = G.order, H.order
    if n * m > MAX_CYCLIC * 5:
        raise UnsupportedDescriptor("product group too large")
    a = np.arange(n * m)
    ga, ha = a // m, a % m
    mul = G.mul[ga[:, None], ga[None, :]] * m + H.mul[ha[:, None], ha[None, :]]
    labels = [f"({G.labels[i]},{H.labels[j]})" for i in range(n) for j in range(m)]
    desc = {"type": "product", "factors": [G.descriptor, H.descriptor]}
    return _from_table(mul, labels, desc)


_SHORT = re.compile(r"^(c|z|d|s)(\d+)$")


def parse_descriptor(raw: Any) -> dict:
    """Normalize a descriptor given as a dict, JSON text, or short name (``c3``, ``s3``, ``q8``, ``c2xc2``)."""
    if isinstance(raw, dict):
        return raw
    if not isinstance(raw, str):
        raise UnsupportedDescriptor(f"cannot interpret group descriptor {raw!r}")
    text = raw.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise UnsupportedDescriptor(f"bad JSON descriptor: {exc}") from None
    parts = text.lower().split("x")
    if len(parts) > 1:
        descs = [parse_descriptor(p) for p in parts]
        out = descs[0]
        for d in descs[1:]:
            out = {"type": "product", "factors": [out, d]}
        return out
    if text.lower() in ("q8", "quaternion8", "quaternion"):
        return {"type": "quaternion8"}
    m = _SHORT.match(text.lower())
    if not m:
        raise UnsupportedDescriptor(f"unknown group name {raw!r}")
    kind = {"c": "cyclic", "z": "cyclic", "d": "dihedral", "s": "symmetric"}[m.group(1)]
    return {"type": kind, "n": int(m.group(2))}


def describe(desc: dict) -> str:
    kind = desc.get("type")
    if kind == "product":
        return "x".join(describe(f) for f in desc["factors"])
    if kind == "quaternion8":
        return "q8"
    short = {"cyclic": "c", "dihedral": "d", "symmetric": "s"}.get(kind, str(kind))
    return f"{short}{desc.get('n')}"


def build_group(descriptor: Any) -> FiniteGroup:
    """Construct and validate a group from a descriptor.

    Supported: ``cyclic(n)``, ``dihedral(n)`` (order 2n), ``symmetric(n)`` for
    n <= 5, ``quaternion8`` and ``product`` of two descriptors.
    """
    desc = parse_descriptor(descriptor)
    kind = desc.get("type")
    try:
        if kind == "cyclic":
            return cyclic(int(desc["n"]))
        if kind == "dihedral":
            return dihedral(int(desc["n"]))
        if kind == "symmetric":
            return symmetric(int(desc["n"]))
        if kind == "quaternion8":
            return quaternion8()
        if kind == "product":
            f1, f2 = desc["factors"]
            return direct_product(build_group(f1), build_group(f2))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UnsupportedDescriptor):
            raise
        raise UnsupportedDescriptor(f"malformed descriptor {desc!r}: {exc}") from None
    raise UnsupportedDescriptor(f"unknown group type {kind!r}")


@dataclass(frozen=True)
class TupleIndex:
    """Row-major flattening of ``G^k`` onto ``0..order**k - 1``."""

    order: int
    arity: int

    @property
    def size(self) -> int:
        return self.order**self.arity

    @property
    def strides(self) -> tuple[int, ...]:
        return tuple(self.order ** (self.arity - 1 - i) for i in range(self.arity))

    def flatten(self, x: Sequence[int]) -> int:
        if len(x) != self.arity:
            raise IndexOutOfRange(f"expected a {self.arity}-tuple, got {tuple(x)}")
        if any(not 0 <= int(c) < self.order for c in x):
            raise IndexOutOfRange(f"tuple {tuple(x)} out of range for order {self.order}")
        return int(sum(int(c) * s for c, s in zip(x, self.strides)))

    def unflatten(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.size:
            raise IndexOutOfRange(f"flat index {i} out of range 0..{self.size - 1}")
        return tuple(int(c) for c in np.unravel_index(i, (self.order,) * self.arity))


def tuple_map(x: Sequence[int], G: FiniteGroup) -> int:
    return TupleIndex(G.order, len(x)).flatten(x)


def tuple_unmap(i: int, G: FiniteGroup, k: int) -> tuple[int, ...]:
    return TupleIndex(G.order, k).unflatten(i)


@dataclass(frozen=True, eq=False)
class MultiFn:
    """A complex function on ``G^k`` stored densely with shape ``(order,)*k``."""

    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.group.order,) * vals.ndim or vals.ndim == 0:
            raise ShapeMismatch(f"values of shape {vals.shape} do not live on {self.group.name}^k")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def arity(self) -> int:
        return self.values.ndim

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, G: FiniteGroup, k: int, c: complex = 1.0, **kw):
        return cls(G, np.full((G.order,) * k, c, dtype=complex), **kw)

    @classmethod
    def zeros(cls, G: FiniteGroup, k: int, **kw):
        return cls.const(G, k, 0.0, **kw)

    @classmethod
    def point_mass(cls, G: FiniteGroup, x: Sequence[int], **kw):
        v = np.zeros((G.order,) * len(x), dtype=complex)
        v[tuple(x)] = 1.0
        return cls(G, v, **kw)

    @classmethod
    def indicator(cls, G: FiniteGroup, k: int, flat: Iterable[int], **kw):
        v = np.zeros(G.order**k, dtype=complex)
        v[list(flat)] = 1.0
        return cls(G, v.reshape((G.order,) * k), **kw)

    @classmethod
    def random(cls, G: FiniteGroup, k: int, rng: np.random.Generator, **kw):
        shape = (G.order,) * k
        return cls(G, rng.standard_normal(shape) + 1j * rng.standard_normal(shape), **kw)

    # algebra ------------------------------------------------------------
    def _check(self, other: "MultiFn"):
        if other.group != self.group:
            raise GroupMismatch(f"{self.group.name} vs {other.group.name}")
        if other.arity != self.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")

    def _like(self, values):
        return MultiFn(self.group, values)

    def __add__(self, other):
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.values - other.values)

    def __neg__(self):
        return self._like(-self.values)

    def __mul__(self, other):
        if isinstance(other, MultiFn):
            self._check(other)
            return self._like(self.values * other.values)
        return self._like(self.values * other)

    __rmul__ = __mul__

    def conj(self):
        return self._like(self.values.conj())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def support(self, tol: float = 0.0) -> np.ndarray:
        """Sorted flat indices where ``|value| > tol``."""
        return np.flatnonzero(np.abs(self.values.ravel()) > tol)

    def allclose(self, other: "MultiFn", atol: float = 1e-10) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.values - other.values), initial=0.0) <= atol)

    def __call__(self, *x: int) -> complex:
        return complex(self.values[tuple(x)])

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        flat = self.values.ravel()
        return {
            "group": self.group.descriptor,
            "arity": self.arity,
            "values": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_json(cls, obj: dict, **kw):
        try:
            G = build_group(obj["group"])
            k = int(obj["arity"])
            vals = np.asarray(obj["values"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, UnsupportedDescriptor):
                raise
            raise SchemaError(f"bad function JSON: {exc}") from None
        if k < 1 or vals.shape != (G.order**k, 2):
            raise SchemaError(f"expected {G.order**k} [re, im] pairs for arity {k}")
        z = (vals[:, 0] + 1j * vals[:, 1]).reshape((G.order,) * k)
        return cls(G, z, **kw)


def haar_pair(u: MultiFn, v: MultiFn) -> complex:
    """Normalized sesquilinear pairing ``(1/|G|^k) sum u * conj(v)``."""
    if u.arity != v.arity:
        raise ArityMismatch(f"arity {u.arity} vs {v.arity}")
    if u.group != v.group:
        raise GroupMismatch(f"{u.group.name} vs {v.group.name}")
    return complex(np.mean(u.values * v.values.conj()))


def right_translation_index(G: FiniteGroup, k: int, x: int) -> tuple[np.ndarray, ...]:
    """Index arrays ``I`` with ``w[I][y] = w(y_1 x, ..., y_k x)``."""
    grids = np.indices((G.order,) * k)
    return tuple(G.mul[g, x] for g in grids)
