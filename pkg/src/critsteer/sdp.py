"""
Small dense primal-dual interior-point SDP solver.

Standard pair, with every variable a block-diagonal stack of equal-size real
symmetric blocks::

    (P)  min <C, X>   s.t.  <A_j, X> = b_j,  X >= 0
    (D)  max b.y      s.t.  Z = C - sum_j y_j A_j >= 0

A batch of problems with the same dimensions is solved in lock-step.  ``C``
has shape ``(B, nb, k, k)``; the constraint matrices ``A`` are either shared,
``(m, nb, k, k)``, or given per instance, ``(B, m, nb, k, k)``; ``b`` is
``(m,)`` or ``(B, m)``.  Solving many instances at once is the point: the
steering-weight problems along a time grid differ only in their data.

Directions are HKM with a Mehrotra predictor-corrector and an infeasible
start at ``X = Z = I``.

Hermitian blocks are handled by the real embedding
``H = A + iB  ->  [[A, -B], [B, A]]`` (see :func:`hermitian_to_real`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SdpResult",
    "solve_sdp",
    "hermitian_to_real",
    "real_to_hermitian",
    "OPTIMAL",
    "MAX_ITERATIONS",
]

OPTIMAL = "optimal"
MAX_ITERATIONS = "max-iterations"

_STEP_FRACTION = 0.98
# iterations without a new best iterate before an instance is given up on
_STALL_LIMIT = 25


@dataclass
class SdpResult:
    """Batched solution; leading axis of every array is the batch index."""

    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    primal_obj: np.ndarray
    dual_obj: np.ndarray
    primal_res: np.ndarray
    dual_res: np.ndarray
    iterations: np.ndarray
    status: list

    @property
    def gap(self) -> np.ndarray:
        return np.abs(self.primal_obj - self.dual_obj)


def hermitian_to_real(H):
    """Real symmetric embedding of a (stack of) Hermitian matrices."""
    H = np.asarray(H)
    A, B = H.real, H.imag
    top = np.concatenate([A, -B], axis=-1)
    bottom = np.concatenate([B, A], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def real_to_hermitian(R):
    """Inverse of :func:`hermitian_to_real`, projecting onto the embedded subspace."""
    R = np.asarray(R, dtype=float)
    k = R.shape[-1] // 2
    a = 0.5 * (R[..., :k, :k] + R[..., k:, k:])
    b = 0.5 * (R[..., k:, :k] - R[..., :k, k:])
    return a + 1j * b


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def _inner(X, Z):
    return np.einsum("Bbpq,Bbpq->B", X, Z)


def _op(A_flat, X):
    # <A_j, X> for every j: (B, m)
    Xf = X.reshape(X.shape[0], -1)
    if A_flat.ndim == 2:
        return Xf @ A_flat.T
    return np.einsum("Bjq,Bq->Bj", A_flat, Xf)


def _adj(A_flat, y, shape):
    if A_flat.ndim == 2:
        return (y @ A_flat).reshape(shape)
    return np.einsum("Bj,Bjq->Bq", y, A_flat).reshape(shape)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX >= 0, per batch entry (inf if unbounded)."""
    w, V = np.linalg.eigh(X)
    w = np.maximum(w, 1e-300)
    S = V * (1.0 / np.sqrt(w))[..., None, :]
    M = np.swapaxes(S, -1, -2) @ dX @ S
    lam_min = np.linalg.eigvalsh(_sym(M))[..., 0].min(axis=-1)
    with np.errstate(divide="ignore"):
        return np.where(lam_min < 0, -1.0 / lam_min, np.inf)


def _safe_inv(Z):
    """Batched inverse; instances whose ``Z`` is numerically singular are flagged."""
    try:
        return np.linalg.inv(Z), np.ones(len(Z), dtype=bool)
    except np.linalg.LinAlgError:
        out = np.empty_like(Z)
        ok = np.ones(len(Z), dtype=bool)
        for i in range(len(Z)):
            try:
                out[i] = np.linalg.inv(Z[i])
            except np.linalg.LinAlgError:
                ok[i] = False
        return out, ok


def _schur_solve(M, rhs):
    """Batched ``M dy = rhs`` with one refinement step.

    Near the optimum ``M`` is badly conditioned and a plain solve lets the
    primal residual drift; a singular instance falls back to the pseudo-inverse.
    """
    def refined(solve, M, rhs):
        dy = solve(M, rhs)
        return dy + solve(M, rhs - (M @ dy[..., None])[..., 0])

    try:
        return refined(lambda M, v: np.linalg.solve(M, v[..., None])[..., 0], M, rhs)
    except np.linalg.LinAlgError:
        out = np.empty_like(rhs)
        for i in range(len(M)):
            try:
                out[i] = refined(np.linalg.solve, M[i], rhs[i])
            except np.linalg.LinAlgError:
                out[i] = refined(lambda M, v: np.linalg.pinv(M, hermitian=True) @ v, M[i], rhs[i])
        return out


def solve_sdp(C, A, b, tol: float = 1e-9, max_iter: int = 200) -> SdpResult:
    """Solve a batch of block-diagonal SDPs.

    ``C`` has shape ``(nb, k, k)`` or ``(B, nb, k, k)``; ``A`` is
    ``(m, nb, k, k)`` or ``(B, m, nb, k, k)``; ``b`` is ``(m,)`` or ``(B, m)``.
    Convergence requires relative duality gap and relative primal and dual
    residuals all below ``tol``.
    """
    C = np.asarray(C, dtype=float)
    squeeze = C.ndim == 3
    if squeeze:
        C = C[None]
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    Bn, nb, k, _ = C.shape
    shared = A.ndim == 4
    m = A.shape[-4]
    if A.shape[-3:] != (nb, k, k) or (not shared and A.shape[0] != Bn) or b.shape[-1] != m:
        raise ValueError("inconsistent SDP data shapes")
    b = np.broadcast_to(b, (Bn, m))
    C = _sym(C)
    A = _sym(A)
    A_flat = A.reshape(m, -1) if shared else A.reshape(Bn, m, -1)
    A_b = A[None] if shared else A
    shape = (Bn, nb, k, k)
    n_tot = nb * k

    X = np.broadcast_to(np.eye(k), shape).copy()
    Z = X.copy()
    y = np.zeros((Bn, m))
    norm_b = 1.0 + np.linalg.norm(b, axis=1)
    norm_c = 1.0 + np.linalg.norm(C.reshape(Bn, -1), axis=1)
    iters = np.zeros(Bn, dtype=int)

    def stats(idx, X, y, Z):
        Af = A_flat if shared else A_flat[idx]
        rp = b[idx] - _op(Af, X)
        Rd = C[idx] - _adj(Af, y, X.shape) - Z
        pobj = _inner(C[idx], X)
        dobj = np.einsum("Bj,Bj->B", y, b[idx])
        pres = np.linalg.norm(rp, axis=1) / norm_b[idx]
        dres = np.linalg.norm(Rd.reshape(len(idx), -1), axis=1) / norm_c[idx]
        rgap = np.abs(pobj - dobj) / (1.0 + np.abs(pobj) + np.abs(dobj))
        return rp, Rd, pres, dres, rgap

    # Late iterations of badly conditioned instances can wander off; the best
    # iterate seen (by the worst of the three measures) is what gets returned.
    best = (X.copy(), y.copy(), Z.copy())
    best_merit = np.full(Bn, np.inf)
    stalled = np.zeros(Bn, dtype=int)

    def remember(idx, Xs, ys, Zs, merit):
        better = merit < best_merit[idx]
        sel = idx[better]
        best[0][sel], best[1][sel], best[2][sel] = Xs[better], ys[better], Zs[better]
        best_merit[sel] = merit[better]
        stalled[idx] = np.where(better, 0, stalled[idx] + 1)

    active = np.arange(Bn)
    for _ in range(max_iter):
        Xa, ya, Za = X[active], y[active], Z[active]
        rp, Rd, pres, dres, rgap = stats(active, Xa, ya, Za)
        remember(active, Xa, ya, Za, np.maximum(np.maximum(pres, dres), rgap))
        keep = ~((pres <= tol) & (dres <= tol) & (rgap <= tol)) & (stalled[active] < _STALL_LIMIT)
        Zi, invertible = _safe_inv(Za)
        # a slack that collapsed to singular cannot move further; freeze it
        keep &= invertible
        active, Xa, ya, Za, Zi, rp, Rd = (v[keep] for v in (active, Xa, ya, Za, Zi, rp, Rd))
        na = active.size
        if na == 0:
            break
        iters[active] += 1
        Af = A_flat if shared else A_flat[active]
        Ab = A_b if shared else A_b[active]
        ashape = Xa.shape

        Zi = _sym(Zi)
        mu = _inner(Xa, Za) / n_tot

        # Schur complement M_jk = <A_j, Zi A_k X>
        T = (Zi[:, None] @ Ab @ Xa[:, None]).reshape(na, m, -1)
        Msch = T @ (Af.T if shared else np.swapaxes(Af, -1, -2))
        Msch = 0.5 * (Msch + np.swapaxes(Msch, -1, -2))
        ZiRdX = Zi @ Rd @ Xa

        def direction(G):
            rhs = rp - _op(Af, G) + _op(Af, ZiRdX)
            dy = _schur_solve(Msch, rhs)
            dZ = Rd - _adj(Af, dy, ashape)
            dX = _sym(G - Zi @ dZ @ Xa)
            return dX, dy, dZ

        # predictor
        dXa, _, dZa = direction(-Xa)
        ap = np.minimum(1.0, _max_step(Xa, dXa))[:, None, None, None]
        ad = np.minimum(1.0, _max_step(Za, dZa))[:, None, None, None]
        mu_aff = _inner(Xa + ap * dXa, Za + ad * dZa) / n_tot
        sigma = np.clip((mu_aff / mu) ** 3, 0.0, 1.0)

        # corrector
        G = (sigma * mu)[:, None, None, None] * Zi - Xa - _sym(Zi @ dZa @ dXa)
        dX, dy, dZ = direction(G)
        ap = np.minimum(1.0, _STEP_FRACTION * _max_step(Xa, dX))
        ad = np.minimum(1.0, _STEP_FRACTION * _max_step(Za, dZ))
        X[active] = _sym(Xa + ap[:, None, None, None] * dX)
        Z[active] = _sym(Za + ad[:, None, None, None] * dZ)
        y[active] = ya + ad[:, None] * dy

    everyone = np.arange(Bn)
    _, _, pres, dres, rgap = stats(everyone, X, y, Z)
    remember(everyone, X, y, Z, np.maximum(np.maximum(pres, dres), rgap))
    X, y, Z = best
    _, _, pres, dres, rgap = stats(everyone, X, y, Z)
    pobj = _inner(C, X)
    dobj = np.einsum("Bj,Bj->B", y, b)
    failed = ~((pres <= tol) & (dres <= tol) & (rgap <= tol))

    status = [MAX_ITERATIONS if f else OPTIMAL for f in failed]
    res = SdpResult(X=X, y=y, Z=Z, primal_obj=pobj, dual_obj=dobj, primal_res=pres,
                    dual_res=dres, iterations=iters, status=status)
    if squeeze:
        res = SdpResult(X=X[0], y=y[0], Z=Z[0], primal_obj=pobj[0], dual_obj=dobj[0],
                        primal_res=pres[0], dual_res=dres[0], iterations=iters[0], status=status[:1])
    return res
