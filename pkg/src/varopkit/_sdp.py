"""Small dense semidefinite programs used by the norm engine.

Solver output is never trusted as a certificate. Callers re-derive exact
factorizations (upper bounds) and explicitly scaled dual points (lower
bounds) from the approximate primal/dual solutions returned here.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

logger = logging.getLogger(__name__)

_TIGHT = dict(tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9, max_iter=200)


def _solve(problem: cp.Problem) -> str:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            problem.solve(solver=cp.CLARABEL, **_TIGHT)
        except cp.error.SolverError:
            logger.debug("tight Clarabel solve failed, retrying with defaults")
            try:
                problem.solve(solver=cp.CLARABEL)
            except cp.error.SolverError:
                problem.solve(solver=cp.SCS, eps=1e-9, max_iters=20000)
    return problem.status


@dataclass
class BlockSchurSolution:
    t: float
    P: np.ndarray
    Q: np.ndarray
    Z: np.ndarray
    dual_P: np.ndarray | None
    dual_Q: np.ndarray | None
    status: str


def _herm(n: int):
    return cp.Variable((n, n), hermitian=True) if n > 0 else None


def block_schur_sdp(
    nrow: int,
    ncol: int,
    p: int = 1,
    q: int = 1,
    Z_fixed: np.ndarray | None = None,
    Lr: np.ndarray | None = None,
    Rr: np.ndarray | None = None,
    Wr: np.ndarray | None = None,
) -> BlockSchurSolution:
    """Minimize ``t`` over ``[[P, Z], [Z^H, Q]] >= 0`` with ``P_xx <= t I_p`` and ``Q_yy <= t I_q``.

    ``P`` has ``nrow`` diagonal blocks of size ``p`` and ``Q`` has ``ncol``
    blocks of size ``q``. ``Z`` is either fixed, or free subject to
    ``Lr @ Z_xy @ Rr == Wr[x, y]`` for every block pair.
    """
    m, n = nrow * p, ncol * q
    P = _herm(m)
    Q = _herm(n)
    t = cp.Variable()
    cons = []
    if Z_fixed is not None:
        Z = np.asarray(Z_fixed, dtype=complex)
        Zexpr = cp.Constant(Z)
    else:
        Zvar = cp.Variable((m, n), complex=True)
        Zexpr = Zvar
        for x in range(nrow):
            for y in range(ncol):
                blk = Zvar[x * p : (x + 1) * p, y * q : (y + 1) * q]
                cons.append(Lr @ blk @ Rr == Wr[x, y])
    M = cp.bmat([[P, Zexpr], [Zexpr.H, Q]])
    lmi = M >> 0
    cons.append(lmi)
    if p == 1:
        cons.append(cp.real(cp.diag(P)) <= t)
    else:
        for x in range(nrow):
            cons.append(t * np.eye(p) - P[x * p : (x + 1) * p, x * p : (x + 1) * p] >> 0)
    if q == 1:
        cons.append(cp.real(cp.diag(Q)) <= t)
    else:
        for y in range(ncol):
            cons.append(t * np.eye(q) - Q[y * q : (y + 1) * q, y * q : (y + 1) * q] >> 0)
    prob = cp.Problem(cp.Minimize(t), cons)
    status = _solve(prob)
    Zval = Z if Z_fixed is not None else Zvar.value
    dual = lmi.dual_value
    dP = dQ = None
    if dual is not None:
        dual = np.asarray(dual)
        dP, dQ = dual[:m, :m], dual[m:, m:]
    return BlockSchurSolution(
        t=float(t.value) if t.value is not None else np.inf,
        P=np.asarray(P.value) if P.value is not None else None,
        Q=np.asarray(Q.value) if Q.value is not None else None,
        Z=np.asarray(Zval) if Zval is not None else None,
        dual_P=dP,
        dual_Q=dQ,
        status=status,
    )


def min_opnorm_affine(shape: tuple[int, int], K: np.ndarray, b: np.ndarray, x0: np.ndarray | None = None):
    """Minimize ``||A||_op`` subject to ``K @ vec(A) = b`` (column-major ``vec``).

    Returns ``(A, status)``; ``A`` is None when the solver failed.
    """
    r, c = shape
    A = cp.Variable((r, c), complex=True)
    t = cp.Variable()
    cons = [K @ cp.vec(A, order="F") == b, cp.bmat([[t * np.eye(r), A], [A.H, t * np.eye(c)]]) >> 0]
    prob = cp.Problem(cp.Minimize(t), cons)
    status = _solve(prob)
    if A.value is None:
        return None, status
    return np.asarray(A.value), status


def trace_lift(mats: np.ndarray, target: np.ndarray):
    """Minimize ``(tr P + tr Q)/2`` over ``[[P, X], [X^H, Q]] >= 0`` with ``tr(mats[k] @ X) = target[k]``.

    ``mats`` has shape ``(K, D, D)``. Returns the full PSD block matrix
    (``2D x 2D``) or None on failure, plus the solver status.
    """
    K, D, _ = mats.shape
    Mv = cp.Variable((2 * D, 2 * D), hermitian=True)
    X = Mv[:D, D:]
    # tr(L X) = sum_ij L_ji X_ij
    flat = mats.transpose(0, 2, 1).reshape(K, D * D)
    cons = [Mv >> 0, flat @ cp.vec(X, order="C") == target]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(Mv)) / 2), cons)
    status = _solve(prob)
    if Mv.value is None:
        return None, status
    return np.asarray(Mv.value), status
