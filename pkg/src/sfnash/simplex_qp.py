"""Convex quadratic programs over the probability simplex.

minimize 0.5 * a^T Q a + b^T a  subject to  a >= 0, sum(a) = 1

Frank-Wolfe with away steps and exact line search; the linear oracle over the
simplex is a coordinate argmin. Every few iterations the current support is
polished by solving the equality-constrained KKT system, which terminates the
method exactly once the optimal face has been identified.
"""

from __future__ import annotations

import numpy as np

from .errors import InnerSolveError


def fw_gap(Q: np.ndarray, b: np.ndarray, alpha: np.ndarray) -> float:
    grad = Q @ alpha + b
    return float(grad @ alpha - grad.min())


def objective(Q, b, alpha) -> float:
    return float(0.5 * alpha @ Q @ alpha + b @ alpha)


def _polish(Q, b, alpha):
    idx = np.flatnonzero(alpha > 0)
    k = idx.size
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = Q[np.ix_(idx, idx)]
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.concatenate([-b[idx], [1.0]])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    scale = 1.0 + float(np.abs(rhs).max())
    if np.abs(kkt @ sol - rhs).max() > 1e-10 * scale:
        return None
    a = sol[:k]
    if a.min() < -1e-13:
        return None
    a = np.clip(a, 0.0, None)
    total = a.sum()
    if total <= 0:
        return None
    out = np.zeros_like(alpha)
    out[idx] = a / total
    return out


def solve_simplex_qp(Q, b, alpha0=None, tol: float = 1e-12, max_iter: int = 20000,
                     polish_every: int = 5):
    """Return (alpha, gap, iterations); raises InnerSolveError when the cap is hit."""
    Q = np.asarray(Q, dtype=float)
    b = np.asarray(b, dtype=float)
    m = b.size
    if m == 1:
        return np.ones(1), 0.0, 0
    if alpha0 is None:
        alpha = np.zeros(m)
        alpha[int(np.argmin(0.5 * np.diag(Q) + b))] = 1.0
    else:
        alpha = np.array(alpha0, dtype=float)
    gap = np.inf
    for it in range(max_iter):
        grad = Q @ alpha + b
        s = int(np.argmin(grad))
        g_alpha = float(grad @ alpha)
        gap = g_alpha - float(grad[s])
        if gap <= tol:
            return alpha, max(gap, 0.0), it
        if it % polish_every == polish_every - 1:
            cand = _polish(Q, b, alpha)
            if cand is not None and objective(Q, b, cand) <= objective(Q, b, alpha) + 1e-15:
                cgap = fw_gap(Q, b, cand)
                alpha = cand
                if cgap <= tol:
                    return alpha, max(cgap, 0.0), it
                continue
        support = np.flatnonzero(alpha > 0)
        v = int(support[np.argmax(grad[support])])
        away_gap = float(grad[v]) - g_alpha
        if gap >= away_gap:
            d = -alpha.copy()
            d[s] += 1.0
            gmax = 1.0
            drop = None
        else:
            d = alpha.copy()
            d[v] -= 1.0
            gmax = alpha[v] / (1.0 - alpha[v])
            drop = v
        curv = float(d @ Q @ d)
        slope = float(grad @ d)
        gamma = gmax if curv <= 0 else min(gmax, -slope / curv)
        alpha = alpha + gamma * d
        if drop is not None and gamma == gmax:
            alpha[drop] = 0.0
        alpha[alpha < 1e-17] = 0.0
        alpha /= alpha.sum()
    raise InnerSolveError(f"simplex QP did not reach gap {tol:g} in {max_iter} iterations", gap)
