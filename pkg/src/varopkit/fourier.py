"""Elements of A(G) and A^n(G): exact and variational norms, theta, multipliers.

A^n(G) norms are computed from representations

    u(x_1, ..., x_n) = g^* L(x_1) A_1 L(x_2) A_2 ... A_{n-1} L(x_n) f

with ``L = lambda (x) I_m`` the left regular representation with multiplicity
``m``. The witness value ``||g|| ||A_1|| ... ||A_{n-1}|| ||f||`` is an upper
bound for the norm. Internally vectors live in orthonormal coordinates of
``L^2(G)`` (function values divided by ``sqrt|G|``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _sdp
from .errors import ArityError, ArityMismatch, GroupMismatch, Infeasible, SchemaError
from .factorization import _cjson, _cparse
from .group import FiniteGroup, MultiFn, TupleIndex
from .factorization import HaagFactorization, OpFactorization
from .norms import NormCertificate, haagerup_norm, reconcile, residual_slack
from .reps import GroupDual, dual_of, fourier_coefficient

logger = logging.getLogger(__name__)

LSTSQ_RCOND = 1e-10
FIT_TOL = 1e-9


class AFn(MultiFn):
    """A function on ``G^n`` viewed as an element of A^n(G)."""

    def _like(self, values):
        return AFn(self.group, values)

    @classmethod
    def of(cls, u: MultiFn) -> "AFn":
        return u if isinstance(u, AFn) else cls(u.group, u.values)


@dataclass(frozen=True, eq=False)
class RepWitness:
    """``u(x) = g^* L(x_1) A_1 ... A_{n-1} L(x_n) f`` in orthonormal coordinates.

    ``f`` and ``g`` have shape ``(|G|, m)``; each middle operator has shape
    ``(|G| m, |G| m)`` acting on ``C^|G| (x) C^m`` in row-major order.
    """

    group: FiniteGroup
    f: np.ndarray
    g: np.ndarray
    middles: tuple[np.ndarray, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.middles) + 1

    @property
    def multiplicity(self) -> int:
        return self.f.shape[1]

    def lifted(self, x: int) -> np.ndarray:
        return np.kron(self.group.regular_rep(x), np.eye(self.multiplicity))

    def value(self) -> float:
        v = np.linalg.norm(self.f) * np.linalg.norm(self.g)
        for A in self.middles:
            v *= np.linalg.norm(A, 2)
        return float(v)

    def evaluate(self) -> AFn:
        G, n = self.group, self.arity
        return AFn(G, _chain_values(G, self.g.reshape(-1), self.middles, self.f.reshape(-1), self.multiplicity).reshape((G.order,) * n))

    def residual(self, u: MultiFn) -> float:
        return float(np.max(np.abs(self.evaluate().values - u.values)))

    def function_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """``f`` and ``g`` as function values (normalized ``L^2`` convention)."""
        s = np.sqrt(self.group.order)
        return self.f * s, self.g * s

    def to_json(self) -> dict:
        f, g = self.function_vectors()
        return {"f": _cjson(f), "g": _cjson(g), "middles": [_cjson(A) for A in self.middles], "value": self.value()}

    @classmethod
    def from_json(cls, G: FiniteGroup, obj: dict) -> "RepWitness":
        try:
            s = np.sqrt(G.order)
            f = _cparse(obj["f"]) / s
            g = _cparse(obj["g"]) / s
            mids = tuple(_cparse(A) for A in obj.get("middles", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad witness JSON: {exc}") from None
        return cls(G, f, g, mids)


def _lifted_stack(G: FiniteGroup, m: int) -> np.ndarray:
    lam = G.regular_stack
    if m == 1:
        return lam.astype(complex)
    return np.einsum("xij,ab->xiajb", lam, np.eye(m)).reshape(G.order, G.order * m, G.order * m).astype(complex)


def _chain_values(G: FiniteGroup, g: np.ndarray, middles: Sequence[np.ndarray], f: np.ndarray, m: int) -> np.ndarray:
    """Flat array of ``g^* L(x_1) A_1 ... L(x_n) f`` over all tuples, row-major."""
    Lst = _lifted_stack(G, m)
    # right vectors: R_k(x_k..x_n) for the suffix, built from the back
    R = Lst @ f  # (X, D)
    for A in reversed(middles):
        R = np.einsum("xij,jk,...k->x...i", Lst, A, R)
    return np.einsum("i,...i->...", g.conj(), R).reshape(-1)


def _suffix(Lst, middles, f):
    """Vectors ``L(x_k) A_k ... L(x_n) f`` for each suffix start; list indexed by k."""
    out = [None] * (len(middles) + 1)
    R = Lst @ f
    out[-1] = R
    for k in range(len(middles) - 1, -1, -1):
        R = np.einsum("xij,jk,...k->x...i", Lst, middles[k], R)
        out[k] = R
    return out


def _prefix(Lst, middles, g):
    """Row vectors ``g^* L(x_1) A_1 ... L(x_k)`` (conjugated as column data)."""
    out = []
    P = np.einsum("i,xij->xj", g.conj(), Lst)
    out.append(P)
    for A in middles:
        P = np.einsum("...i,ij,yjk->...yk", P, A, Lst)
        out.append(P)
    return out


def _lstsq_min_norm(K: np.ndarray, b: np.ndarray) -> np.ndarray:
    x, *_ = np.linalg.lstsq(K, b, rcond=LSTSQ_RCOND)
    return x


# ---------------------------------------------------------------------------
# exact norm


def a_norm_exact(u: MultiFn, dual: GroupDual | None = None) -> float:
    """``sum_pi d_pi ||u_hat(pi)||_1``."""
    if u.arity != 1:
        raise ArityError(f"the closed form applies to one variable, got arity {u.arity}")
    dual = dual or dual_of(u.group)
    if dual.group != u.group:
        raise GroupMismatch(f"{dual.group.name} vs {u.group.name}")
    total = 0.0
    for p in dual:
        total += p.dim * float(np.sum(np.linalg.svd(fourier_coefficient(u, p), compute_uv=False)))
    return total


# ---------------------------------------------------------------------------
# variational norm


def _fit_f(G, g, middles, u_flat, m):
    """Min-norm ``f`` with ``g^* L(x_1) ... L(x_n) f = u``."""
    Lst = _lifted_stack(G, m)
    if middles:
        rows = _prefix(Lst, middles, g)[-1]  # (X,)*n + (D,)
        K = rows.reshape(-1, rows.shape[-1])
    else:
        K = np.einsum("i,xij->xj", g.conj(), Lst)
    f = _lstsq_min_norm(K, u_flat)
    return f, float(np.max(np.abs(K @ f - u_flat)))


def _fit_g(G, f, middles, u_flat, m):
    Lst = _lifted_stack(G, m)
    cols = _suffix(Lst, middles, f)[0]  # (X,)*n + (D,)
    C = cols.reshape(-1, cols.shape[-1])
    g = _lstsq_min_norm(C.conj(), u_flat.conj())
    return g, float(np.max(np.abs(C.conj() @ g - u_flat.conj())))


def _fit_middle(G, g, f, middles, k, u_flat, m):
    """Minimize ``||A_k||`` subject to the interpolation constraints."""
    Lst = _lifted_stack(G, m)
    left = _prefix(Lst, list(middles[:k]), g)[k]  # rows g^* L.. L(x_{k+1}); shape (X,)*(k+1) + (D,)
    right = _suffix(Lst, list(middles[k + 1 :]), f)[0]  # (X,)*(n-k-1) + (D,)
    D = Lst.shape[1]
    lflat = left.reshape(-1, D)
    rflat = right.reshape(-1, D)
    # u[a, b] = sum_ij l[a, i] A[i, j] r[b, j]; vec_F(A) index i + j*D
    K = np.einsum("bj,ai->abji", rflat, lflat).reshape(-1, D * D)
    A, _ = _sdp.min_opnorm_affine((D, D), K, u_flat)
    if A is None:
        return None, np.inf
    A = _exact_correct(K, A.reshape(-1, order="F"), u_flat).reshape(D, D, order="F")
    return A, float(np.max(np.abs(K @ A.reshape(-1, order="F") - u_flat)))


def _exact_correct(K, x0, b):
    delta = _lstsq_min_norm(K, b - K @ x0)
    return x0 + delta


def _balance(w: RepWitness) -> RepWitness:
    nf, ng = np.linalg.norm(w.f), np.linalg.norm(w.g)
    if nf == 0 or ng == 0:
        return w
    s = np.sqrt(ng / nf)
    return RepWitness(w.group, w.f * s, w.g / s, w.middles)


def _lift_pair(G: FiniteGroup, mats: np.ndarray, u_flat: np.ndarray):
    """Trace-lift SDP for ``u_k = tr(mats[k] X)``, ``X = f g^*``; returns ``(f, g)`` with multiplicity = rank."""
    M, status = _sdp.trace_lift(mats, u_flat)
    if M is None:
        return None
    D = mats.shape[1]
    M = (M + M.conj().T) / 2
    evals, evecs = np.linalg.eigh(M)
    order = np.argsort(evals)[::-1]
    evals, evecs = np.clip(evals[order], 0, None), evecs[:, order]
    r = max(1, int(np.sum(evals > 1e-7 * max(evals[0], 1e-300))))
    V = evecs[:, :r] * np.sqrt(evals[:r])[None, :]
    return V[:D], V[D:]


def _compress_rank_one(G: FiniteGroup, X: np.ndarray, dual: GroupDual) -> tuple[np.ndarray, np.ndarray]:
    """Single vectors ``f, g`` with ``tr(lambda(x) f g^*) = tr(lambda(x) X)`` and ``||f|| ||g|| <= ||X||_1``.

    In the Peter-Weyl basis ``lambda`` acts on the row index of each ``d x d``
    coefficient block, so only the partial trace over the column index of each
    block matters; an SVD of that partial trace gives the vectors.
    """
    U = dual.peter_weyl_basis / np.sqrt(G.order)
    Xt = U.conj().T @ X @ U
    f = np.zeros(G.order, dtype=complex)
    g = np.zeros(G.order, dtype=complex)
    off = 0
    for p in dual:
        d = p.dim
        blk = Xt[off : off + d * d, off : off + d * d].reshape(d, d, d, d)
        T = np.einsum("ijkj->ik", blk)
        V, sig, Wh = np.linalg.svd(T)
        root = np.sqrt(sig)
        f[off : off + d * d] = (V * root[None, :]).reshape(-1)
        g[off : off + d * d] = (Wh.conj().T * root[None, :]).reshape(-1)
        off += d * d
    return U @ f, U @ g


def _n1_witness(G: FiniteGroup, u_flat: np.ndarray, dual: GroupDual | None = None) -> RepWitness | None:
    lam = G.regular_stack.astype(complex)
    pair = _lift_pair(G, lam, u_flat)
    if pair is None:
        return None
    F, Gm = pair  # u(x) = tr(lam(x) F Gm^*)
    f, g = _compress_rank_one(G, F @ Gm.conj().T, dual or dual_of(G))
    K = np.einsum("i,xij->xj", g.conj(), lam)
    f = _exact_correct(K, f, u_flat)
    return _balance(RepWitness(G, f[:, None], g[:, None], ()))


def _product_start(G: FiniteGroup, u: MultiFn) -> RepWitness | None:
    """If ``u = v(x_1 ... x_n)``, lift the one-variable optimum of ``v`` with identity middles."""
    n = u.arity
    prod = G.product_map(n)
    v = np.zeros(G.order, dtype=complex)
    v[prod.reshape(-1)] = u.values.reshape(-1)
    if not np.array_equal(v[prod], u.values):
        return None
    base = _n1_witness(G, v)
    if base is None:
        return None
    D = G.order * base.multiplicity
    return RepWitness(G, base.f, base.g, tuple(np.eye(D, dtype=complex) for _ in range(n - 1)))


def _basis_start(G: FiniteGroup, u: MultiFn) -> RepWitness:
    """For two variables: ``f = g = e_e`` and ``A[c, b] = u(c^-1, b)``."""
    e = np.zeros((G.order, 1), dtype=complex)
    e[0, 0] = 1.0
    A = u.values[G.inv, :]
    return RepWitness(G, e, e.copy(), (A.astype(complex),))


def _random_start(G: FiniteGroup, n: int, rng: np.random.Generator) -> RepWitness:
    m = G.order ** (n - 1)
    D = G.order * m

    def cplx(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    mids = tuple(cplx(D, D) / np.sqrt(D) for _ in range(n - 1))
    return RepWitness(G, cplx(G.order, m), cplx(G.order, m), mids)


def _improve(w: RepWitness, u: MultiFn, iters: int, tol: float) -> RepWitness:
    """Block-coordinate minimization; each block solve is convex and exact."""
    G, m = w.group, w.multiplicity
    u_flat = u.values.reshape(-1)
    scale = max(1.0, u.sup_norm())
    g = w.g.reshape(-1)
    f = w.f.reshape(-1)
    mids = list(w.middles)
    best = w if w.residual(u) <= FIT_TOL * scale else None
    prev = best.value() if best is not None else np.inf
    for _ in range(iters):
        f_new, res = _fit_f(G, g, mids, u_flat, m)
        if res <= FIT_TOL * scale:
            f = f_new
        g_new, res = _fit_g(G, f, mids, u_flat, m)
        if res <= FIT_TOL * scale:
            g = g_new
        for k in range(len(mids)):
            A, res = _fit_middle(G, g, f, mids, k, u_flat, m)
            if A is not None and res <= FIT_TOL * scale:
                mids[k] = A
        cand = RepWitness(G, f.reshape(G.order, m), g.reshape(G.order, m), tuple(mids))
        if cand.residual(u) <= FIT_TOL * scale:
            cand = _balance(cand)
            if best is None or cand.value() < best.value():
                best = cand
        cur = best.value() if best is not None else np.inf
        if np.isfinite(prev) and cur > prev * (1 - tol):
            break
        prev = cur
    return best


def _polish_pair(w: RepWitness, u: MultiFn) -> RepWitness:
    """Re-solve ``(g, f)`` jointly by the trace lift with the middles fixed, keeping a rank-one extraction."""
    G, m = w.group, w.multiplicity
    Lst = _lifted_stack(G, m)
    n = w.arity
    D = Lst.shape[1]
    # chain matrices M(x) = L(x_1) A_1 ... L(x_n); u = g^* M f = tr(M f g^*)
    M = Lst
    for A in w.middles:
        M = np.einsum("...ij,jk,ykl->...yil", M, A, Lst)
    mats = M.reshape(-1, D, D)
    pair = _lift_pair(G, mats, u.values.reshape(-1))
    if pair is None:
        return w
    F, Gm = pair
    f0, g0 = F[:, 0], Gm[:, 0]
    f = _exact_correct(np.einsum("i,kij->kj", g0.conj(), mats), f0, u.values.reshape(-1))
    cand = _balance(RepWitness(G, f.reshape(G.order, m), g0.reshape(G.order, m), w.middles))
    if cand.residual(u) <= FIT_TOL * max(1.0, u.sup_norm()) and cand.value() < w.value():
        return cand
    return w


def _substituted(u: MultiFn) -> np.ndarray:
    """Values of ``u(z_1 z_2^-1, ..., z_n z_(n+1)^-1)`` on ``G^(n+1)``."""
    G, n = u.group, u.arity
    grids = np.indices((G.order,) * (n + 1))
    idx = tuple(G.mul[grids[k], G.inv[grids[k + 1]]] for k in range(n))
    return u.values[idx]


def pullback_witness(G: FiniteGroup, F: OpFactorization | HaagFactorization) -> RepWitness:
    """Representation of ``u`` from a factorization of ``u(z_1 z_2^-1, ...)`` by averaging.

    With blocks ``B_1, ..., B_(n+1)``, ``u(x) = |G|^-1 sum_h B_1(h) B_2(x_1^-1 h) ...``;
    the end blocks become vectors and the middle ones diagonal multipliers, so the
    value is at most the factorization bound. The caller must check the residual.
    """
    if isinstance(F, HaagFactorization):
        F = F.to_op()
    m = max(F.bonds)
    X = G.order
    root = np.sqrt(X)
    first, *mids, last = F.blocks
    g = np.zeros((X, m), dtype=complex)
    g[:, : first.shape[2]] = first[:, 0, :].conj() / root
    f = np.zeros((X, m), dtype=complex)
    f[:, : last.shape[1]] = last[:, :, 0] / root
    middles = []
    for B in mids:
        A = np.zeros((X * m, X * m), dtype=complex)
        for h in range(X):
            A[h * m : h * m + B.shape[1], h * m : h * m + B.shape[2]] = B[h]
        middles.append(A)
    return RepWitness(G, f, g, tuple(middles))


def slice_lower(u: MultiFn, dual: GroupDual | None = None) -> tuple[float, dict]:
    """Largest exact one-variable norm over all slices of ``u``.

    Freezing every variable but one maps a representation of ``u`` to one of
    the slice with no larger value, so each slice norm is a lower bound.
    """
    G, n = u.group, u.arity
    dual = dual or dual_of(G)
    best, where = 0.0, {}
    for axis in range(n):
        moved = np.moveaxis(u.values, axis, -1).reshape(-1, G.order)
        for i, row in enumerate(moved):
            if not np.any(row):
                continue
            val = a_norm_exact(AFn(G, row), dual)
            if val > best:
                rest = np.unravel_index(i, (G.order,) * (n - 1))
                best, where = val, {"axis": axis, "fixed": [int(r) for r in rest], "value": val}
    return best, where


def a_norm_variational(
    u: MultiFn,
    restarts: int = 4,
    seed: int = 0,
    tol: float = 1e-6,
    iters: int = 15,
    dual: GroupDual | None = None,
    pullback: bool = True,
    v_factorization: OpFactorization | HaagFactorization | None = None,
) -> tuple[NormCertificate, RepWitness]:
    """Certified interval for ``||u||_{A^n(G)}`` together with the best representation found.

    One variable: the trace-lift semidefinite program gives the optimum
    directly. Several variables: block-coordinate descent from a product
    start (when ``u`` factors through the group product), a basis start
    (two variables) and ``restarts`` random starts with multiplicity
    ``|G|^(n-1)``. With ``pullback`` a factorization of the substituted
    function (given, or found by a short Haagerup sweep) is averaged back
    into a representation and competes as one more candidate. The lower bound is the exact value for one variable and the best
    one-variable slice otherwise.
    """
    u = AFn.of(u)
    G, n = u.group, u.arity
    scale = max(1.0, u.sup_norm())
    if u.sup_norm() == 0.0:
        z = np.zeros((G.order, 1), dtype=complex)
        D = G.order
        wit = RepWitness(G, z, z.copy(), tuple(np.zeros((D, D), dtype=complex) for _ in range(n - 1)))
        return NormCertificate(0.0, 0.0, wit, {"kind": "zero"}, "als", seed, tol, extras={"restarts": restarts}), wit

    u_flat = u.values.reshape(-1)
    candidates: list[RepWitness] = []
    if n == 1:
        w = _n1_witness(G, u_flat)
        if w is not None:
            candidates.append(w)
    else:
        rng = np.random.default_rng(seed)
        starts = []
        ps = _product_start(G, u)
        if ps is not None:
            starts.append(ps)
        if n == 2:
            starts.append(_basis_start(G, u))
        starts.extend(_random_start(G, n, rng) for _ in range(restarts))
        for s in starts:
            w = _improve(s, u, iters, 1e-6)
            if w is not None:
                candidates.append(_polish_pair(w, u))
        if pullback or v_factorization is not None:
            F = v_factorization
            if F is None:
                F = haagerup_norm(_substituted(u), tol=tol, restarts=0, max_sweeps=2, seed=seed).upper_witness
            candidates.append(_balance(pullback_witness(G, F)))
    feasible = [w for w in candidates if w.residual(u) <= FIT_TOL * scale]
    if not feasible:
        res = min((w.residual(u) for w in candidates), default=np.inf)
        raise Infeasible(f"no representation fitted below tolerance (best residual {res:.3e})")
    best = min(feasible, key=lambda w: w.value() + residual_slack(w.evaluate().values, u.values))
    upper = best.value() + residual_slack(best.evaluate().values, u.values)
    lower = u.sup_norm()
    lwit = {"kind": "sup", "point": [int(i) for i in np.unravel_index(np.argmax(np.abs(u.values)), u.values.shape)]}
    if n == 1:
        exact = a_norm_exact(u, dual)
        if exact > lower:
            lower, lwit = exact, {"kind": "fourier", "value": exact}
    else:
        val, where = slice_lower(u, dual)
        if val > lower:
            lower, lwit = val, {"kind": "slice", **where}
    flags = []
    lower, upper = reconcile(lower, upper, scale, flags)
    if upper - lower > tol:
        flags.append("SolverStall")
    cert = NormCertificate(lower, upper, best, lwit, "als", seed, tol, flags, extras={"restarts": restarts, "multiplicity": best.multiplicity})
    return cert, best


# ---------------------------------------------------------------------------
# theta and multipliers


def theta_embed(v: MultiFn, n: int) -> AFn:
    """``theta(v)(x_1, ..., x_n) = v(x_1 x_2 ... x_n)``."""
    if v.arity != 1:
        raise ArityMismatch("theta embeds functions of one variable")
    if n < 1:
        raise ArityMismatch("target arity must be positive")
    return AFn(v.group, v.values[v.group.product_map(n)])


def multiplier_apply(u: MultiFn, x: Sequence[int]) -> tuple[complex, int]:
    """``M_u(lambda(x_1) (x) ... (x) lambda(x_n)) = u(x) lambda(x_1 ... x_n)``: coefficient and element."""
    x = tuple(int(c) for c in x)
    TupleIndex(u.group.order, u.arity).flatten(x)
    return complex(u.values[x]), u.group.product(x)


def multiplier_operator(u: MultiFn, x: Sequence[int]) -> np.ndarray:
    c, g = multiplier_apply(u, x)
    return c * u.group.regular_rep(g)


def multiplier_conv(u: MultiFn, fs: Sequence[MultiFn]) -> MultiFn:
    """``g(x) = |G|^-(n-1) sum_{y_1 ... y_n = x} f_1(y_1) ... f_n(y_n) u(y_1, ..., y_n)``.

    This is the integral ``f_1(x_1) f_2(x_1^-1 x_2) ... u(x_1, x_1^-1 x_2, ...)`` after the
    substitution ``y_k = x_{k-1}^-1 x_k``.
    """
    n = u.arity
    if len(fs) != n:
        raise ArityMismatch(f"need {n} functions, got {len(fs)}")
    G = u.group
    T = np.array(u.values)
    for k, f in enumerate(fs):
        if f.group != G:
            raise GroupMismatch(f"{f.group.name} vs {G.name}")
        if f.arity != 1:
            raise ArityMismatch("multiplier_conv takes functions of one variable")
        shape = [1] * n
        shape[k] = G.order
        T = T * f.values.reshape(shape)
    prod = G.product_map(n).reshape(-1)
    flat = T.reshape(-1)
    re = np.bincount(prod, weights=flat.real, minlength=G.order)
    im = np.bincount(prod, weights=flat.imag, minlength=G.order)
    return MultiFn(G, (re + 1j * im) / G.order ** (n - 1))
