# linalg/svd.py
"""
Truncated SVD via one-sided (Hestenes) Jacobi rotations.

Columns are orthogonalized pairwise. Each sweep visits every column pair once
using a round-robin tournament ordering, so the n/2 disjoint pairs of a round
are rotated together with vectorized numpy operations. Tall inputs are first
reduced with a QR factorization so the rotations act on a small square factor.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.conf import gfix_setting
from core.errors import ConvergenceError, NonFiniteError, UsageError

logger = logging.getLogger("linalg")


@dataclass(frozen=True)
class SvdFactors:
    u: np.ndarray  # m x k, orthonormal columns
    d: np.ndarray  # k, non-increasing, >= 0
    v: np.ndarray  # n x k, orthonormal columns

    @property
    def k(self) -> int:
        return int(self.d.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.d) @ self.v.T


def _round_robin(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Pair schedule covering every (i, j), i < j, exactly once in n-1 rounds (n even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        left = players[:half]
        right = players[half:][::-1]
        p = np.array([min(a, b) for a, b in zip(left, right)])
        q = np.array([max(a, b) for a, b in zip(left, right)])
        rounds.append((p, q))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi(a: np.ndarray, tol: float, max_sweeps: int) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Orthogonalize the columns of `a` (m x n, m >= n). Returns (a @ V, V, sweeps)
    where the columns of a @ V are mutually orthogonal.
    """
    m, n = a.shape
    work = a.copy()
    v = np.eye(n)
    if n == 1:
        return work, v, 0

    size = n + (n % 2)
    if size != n:
        # phantom zero column makes the tournament even; it never rotates
        work = np.hstack([work, np.zeros((m, 1))])
        v = np.pad(v, ((0, 1), (0, 1)))
    rounds = _round_robin(size)
    # below this, dot products of columns under the rank cutoff are pure rounding
    eps = np.finfo(np.float64).eps
    floor = eps * (eps * np.linalg.norm(a)) ** 2

    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p, q in rounds:
            ap = work[:, p]
            aq = work[:, q]
            alpha = np.einsum("ij,ij->j", ap, ap)
            beta = np.einsum("ij,ij->j", aq, aq)
            gamma = np.einsum("ij,ij->j", ap, aq)

            active = (np.abs(gamma) > tol * np.sqrt(alpha * beta)) & (np.abs(gamma) > floor)
            if not np.any(active):
                continue
            rotated = True
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]

            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            t[zeta == 0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t

            ap, aq = work[:, p], work[:, q]
            work[:, p] = c * ap - s * aq
            work[:, q] = s * ap + c * aq
            vp, vq = v[:, p], v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        if not rotated:
            return work[:, :n], v[:n, :n], sweep

    raise ConvergenceError(f"Jacobi SVD did not converge within {max_sweeps} sweeps.")


def _complete_basis(u: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Replace columns not in `keep` with an orthonormal complement of the kept ones."""
    missing = np.flatnonzero(~keep)
    if missing.size == 0:
        return u
    m = u.shape[0]
    kept = u[:, keep]
    q, _ = np.linalg.qr(np.hstack([kept, np.eye(m)]))
    u = u.copy()
    u[:, missing] = q[:, kept.shape[1]: kept.shape[1] + missing.size]
    return u


def _fix_signs(u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # largest-magnitude entry of each u column is made non-negative
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[idx, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * signs, v * signs


def svd(w: np.ndarray, *, tol: Optional[float] = None, max_sweeps: Optional[int] = None) -> SvdFactors:
    """Full (thin) SVD of a 2-D matrix, k = min(m, n). Computed in float64."""
    tol = gfix_setting("SVD_TOLERANCE") if tol is None else float(tol)
    max_sweeps = gfix_setting("SVD_MAX_SWEEPS") if max_sweeps is None else max_sweeps
    if not (tol >= 0 and math.isfinite(tol)) or int(max_sweeps) < 1:
        raise UsageError(f"svd needs tol >= 0 and max_sweeps >= 1, got tol={tol!r}, max_sweeps={max_sweeps!r}.")
    max_sweeps = int(max_sweeps)

    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or min(w.shape) < 1:
        raise UsageError(f"svd expects a non-empty 2-D matrix, got shape {w.shape}.")
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("svd input contains NaN or Inf.")

    transposed = w.shape[0] < w.shape[1]
    a = w.T if transposed else w
    m, n = a.shape

    # QR reduction: a = Q R, rotate the n x n factor R instead of a.
    q, r = np.linalg.qr(a)
    work, v, sweeps = _jacobi(r, tol, max_sweeps)

    d = np.linalg.norm(work, axis=0)
    order = np.argsort(-d, kind="stable")
    d, work, v = d[order], work[:, order], v[:, order]

    # rank cutoff in the style of numpy.linalg.matrix_rank, on the Frobenius norm
    cutoff = np.finfo(np.float64).eps * max(m, n) * np.linalg.norm(a)
    keep = d > max(cutoff, np.finfo(np.float64).tiny)
    u_small = np.zeros_like(work)
    u_small[:, keep] = work[:, keep] / d[keep]
    u_small = _complete_basis(u_small, keep)
    d = np.where(keep, d, 0.0)
    u = q @ u_small

    if transposed:
        u, v = v, u
    u, v = _fix_signs(u, v)
    logger.debug("svd shape=%s sweeps=%d", w.shape, sweeps)
    return SvdFactors(u=u, d=d, v=v)


def truncate(f: SvdFactors, r: int) -> SvdFactors:
    """Keep the leading r singular triplets."""
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= f.k:
        raise UsageError(f"Truncation rank must be in [1, {f.k}], got {r}.")
    return SvdFactors(u=f.u[:, :r], d=f.d[:r], v=f.v[:, :r])


def tail_energy(f: SvdFactors, r: int) -> float:
    """Sum of squared singular values beyond the first r (the Eckart-Young error)."""
    return float(np.sum(f.d[r:] ** 2))
