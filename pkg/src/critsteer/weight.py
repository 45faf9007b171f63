"""
Temporal assemblages and the steering weight.

The weight of an assemblage ``{sigma_{a|i}}`` is ``1 - max sum_l Tr s_l`` over
PSD hidden states ``s_l`` (one per deterministic strategy ``l``) subject to
``sigma_{a|i} - sum_l D_l(a|i) s_l >= 0``.  The dual certificate is a set of
PSD ``F_{a|i}`` with ``sum_{a,i} D_l(a|i) F_{a|i} >= I`` for every ``l``;
``sum Tr[F_{a|i} sigma_{a|i}]`` bounds the maximum from above.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import ZeroProbabilityBranch, apply_dephasing, maximally_mixed, measure, validate_state
from .sdp import MAX_ITERATIONS, OPTIMAL, hermitian_to_real, real_to_hermitian, solve_sdp
from .steering import MeasurementSet

__all__ = [
    "Assemblage",
    "StrategySet",
    "SdpSolution",
    "INFEASIBLE_INPUT",
    "OUTCOMES",
    "build_assemblage",
    "assemblage_stack",
    "deterministic_strategies",
    "ts_weight",
    "ts_weight_batch",
]

INFEASIBLE_INPUT = "infeasible-input"
OUTCOMES = (+1, -1)
ASSEMBLAGE_TOL = 1e-10

# Hermitian 2x2 basis: sigma = y0 E0 + y1 E1 + y2 E2 + y3 E3
_HBASIS = np.array([
    [[1, 0], [0, 0]],
    [[0, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
], dtype=complex)
_HBASIS_TRACE = np.array([1.0, 1.0, 0.0, 0.0])


@dataclass(frozen=True)
class Assemblage:
    """``entries[i, j]`` is ``sigma_{a|i}`` with ``a = OUTCOMES[j]``; shape ``(n, 2, 2, 2)``."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def marginals(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def violations(self, tol: float = ASSEMBLAGE_TOL) -> list[str]:
        e = self.entries
        out = []
        if e.ndim != 4 or e.shape[1:] != (2, 2, 2):
            return [f"bad assemblage shape {e.shape}"]
        if np.abs(e - np.conj(np.swapaxes(e, -1, -2))).max() > tol:
            out.append("entries not Hermitian")
        if np.linalg.eigvalsh(e).min() < -tol:
            out.append("entry not positive semidefinite")
        marg = self.marginals()
        if np.abs(marg - marg[0]).max() > tol:
            out.append("marginals differ between measurements")
        if abs(np.trace(marg[0]).real - 1) > tol:
            out.append("marginal trace differs from 1")
        return out


@dataclass(frozen=True)
class StrategySet:
    """``table[l, i, j] = D_l(OUTCOMES[j] | i)``."""

    n: int
    table: np.ndarray

    def __len__(self):
        return self.table.shape[0]


@dataclass
class SdpSolution:
    weight: float
    sigma_tilde: np.ndarray
    dual: np.ndarray
    gap: float
    status: str
    primal_obj: float = float("nan")
    dual_obj: float = float("nan")
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    iterations: int = 0


def build_assemblage(f, meas: MeasurementSet, rho0=None) -> Assemblage:
    """Bob's conditional states after Alice's measurement at t = 0 and dephasing by ``f``."""
    f = complex(getattr(f, "f", f))
    rho0 = maximally_mixed() if rho0 is None else validate_state(rho0)
    entries = np.zeros((meas.n, 2, 2, 2), dtype=complex)
    for i, pair in enumerate(meas.projectors):
        for j, p in enumerate(pair):
            try:
                prob, post = measure(rho0, p)
            except ZeroProbabilityBranch:
                continue
            entries[i, j] = prob * apply_dephasing(post, f)
    return Assemblage(entries)


def assemblage_stack(f_values, meas: MeasurementSet, rho0=None) -> np.ndarray:
    """Entries of ``build_assemblage`` for many factors at once, shape ``(B, n, 2, 2, 2)``."""
    f_values = np.asarray(f_values, dtype=complex).reshape(-1)
    base = build_assemblage(1.0, meas, rho0).entries
    out = np.broadcast_to(base, (f_values.size,) + base.shape).copy()
    out[..., 0, 1] *= np.conj(f_values)[:, None, None]
    out[..., 1, 0] *= f_values[:, None, None]
    return out


def deterministic_strategies(n: int) -> StrategySet:
    if n not in (2, 3):
        raise ValueError(f"n must be 2 or 3, got {n!r}")
    rows = list(itertools.product((0, 1), repeat=n))
    table = np.zeros((len(rows), n, 2))
    for l, row in enumerate(rows):
        for i, j in enumerate(row):
            table[l, i, j] = 1.0
    return StrategySet(n=n, table=table)


def _structure(n: int):
    """Shared constraint data (A, b) in the real embedding, and the strategy table."""
    D = deterministic_strategies(n).table
    n_lam = D.shape[0]
    n_slack = 2 * n
    nb = n_slack + n_lam
    m = 4 * n_lam
    A = np.zeros((m, nb, 2, 2), dtype=complex)
    for l in range(n_lam):
        for p in range(4):
            j = 4 * l + p
            for i in range(n):
                for o in range(2):
                    A[j, 2 * i + o] = D[l, i, o] * _HBASIS[p]
            A[j, n_slack + l] = -_HBASIS[p]
    b = np.tile(_HBASIS_TRACE, n_lam)
    return hermitian_to_real(A), b, D


_STRUCTURES: dict[int, tuple] = {}


def _get_structure(n):
    if n not in _STRUCTURES:
        _STRUCTURES[n] = _structure(n)
    return _STRUCTURES[n]


def _min_eig(H):
    """Smallest eigenvalue of a stack of 2x2 Hermitian matrices.

    Computed as det / lambda_max, which stays accurate for graded matrices
    such as ``diag(1e-11, 1e12)`` where ``eigvalsh`` loses ``|H| * eps``.
    """
    H = np.asarray(H)
    p, s = H[..., 0, 0].real, H[..., 1, 1].real
    q2 = np.abs(H[..., 0, 1]) ** 2
    half = 0.5 * (p + s)
    disc = np.hypot(0.5 * (p - s), np.sqrt(q2))
    top = half + disc
    with np.errstate(divide="ignore", invalid="ignore"):
        low = np.where(top > 0, (p * s - q2) / top, half - disc)
    return low


# Entries with an eigenvalue below this are treated as singular.
RANK_TOL = 1e-12


@dataclass
class _Reduction:
    """Facial reduction of a stack of assemblages.

    A singular entry forces every hidden state feeding it into its range, so
    ``s_l`` lives on ``span(basis[l])`` of dimension ``dim[l]`` and the slack
    of a rank-1 entry is a scalar along ``rng``.  Without this the problem has
    no strictly feasible point and interior-point iterations crawl.
    """

    rank: np.ndarray   # (B, 2n)
    rng: np.ndarray    # (B, 2n, 2) range vector of rank-1 entries
    dim: np.ndarray    # (B, n_lam)
    vec: np.ndarray    # (B, n_lam, 2) spanning vector when dim == 1

    def signature(self) -> np.ndarray:
        return np.concatenate([self.rank, self.dim], axis=1)


def _reduce(entries, D) -> _Reduction:
    Bn, n = entries.shape[:2]
    w, v = np.linalg.eigh(entries.reshape(Bn, 2 * n, 2, 2))
    rank = (w > RANK_TOL).sum(axis=-1)
    rng = v[..., :, 1]
    n_lam = D.shape[0]
    dim = np.full((Bn, n_lam), 2)
    vec = np.zeros((Bn, n_lam, 2), dtype=complex)
    for l in range(n_lam):
        for i in range(n):
            blk = 2 * i + int(np.argmax(D[l, i]))
            r = rank[:, blk]
            dim[r == 0, l] = 0
            take = (r == 1) & (dim[:, l] == 2)
            vec[take, l] = rng[take, blk]
            clash = (r == 1) & (dim[:, l] == 1) & ~take
            overlap = np.abs(np.einsum("Bx,Bx->B", vec[:, l].conj(), rng[:, blk]))
            dim[clash & (overlap < 1 - 1e-9), l] = 0
            dim[take, l] = 1
    return _Reduction(rank=rank, rng=rng, dim=dim, vec=vec)


def _reduced_problem(entries, D, red: _Reduction):
    """Per-instance (C, A, b, variable map) for one group of equal signature."""
    G, n = entries.shape[:2]
    n_slack = 2 * n
    rank, dim = red.rank[0], red.dim[0]
    # variable matrices: s_l = sum_j y_j V_j over the variables owned by l
    V, owner, btr = [], [], []
    for l in range(D.shape[0]):
        if dim[l] == 2:
            for p in range(4):
                V.append(np.broadcast_to(_HBASIS[p], (G, 2, 2)))
                owner.append(l)
                btr.append(np.full(G, _HBASIS_TRACE[p]))
        elif dim[l] == 1:
            v = red.vec[:, l]
            V.append(np.einsum("Bx,By->Bxy", v, v.conj()))
            owner.append(l)
            btr.append(np.ones(G))
    m = len(V)
    V = np.stack(V, axis=1) if m else np.zeros((G, 0, 2, 2), dtype=complex)
    owner = np.array(owner, dtype=int)
    C_blocks, A_blocks = [], []
    pad = np.diag([0.0, 1.0]).astype(complex)
    lead = np.diag([1.0, 0.0]).astype(complex)
    sig = entries.reshape(G, n_slack, 2, 2)
    for blk in range(n_slack):
        i, o = divmod(blk, 2)
        coef = D[owner, i, o] if m else np.zeros(0)
        if rank[blk] == 2:
            C_blocks.append(sig[:, blk])
            A_blocks.append(coef[None, :, None, None] * V)
        elif rank[blk] == 1:
            r = red.rng[:, blk]
            c = np.einsum("Bx,Bxy,By->B", r.conj(), sig[:, blk], r).real
            a = np.einsum("Bx,Bjxy,By->Bj", r.conj(), V, r).real * coef
            C_blocks.append(c[:, None, None] * lead + pad)
            A_blocks.append(a[..., None, None] * lead)
    for l in range(D.shape[0]):
        sel = owner == l
        if dim[l] == 2:
            C_blocks.append(np.zeros((G, 2, 2), dtype=complex))
            A_blocks.append(np.where(sel[None, :, None, None], -V, 0.0))
        elif dim[l] == 1:
            C_blocks.append(np.broadcast_to(pad, (G, 2, 2)))
            A_blocks.append(np.where(sel[None, :, None, None], -lead, 0.0) * np.ones((G, m, 1, 1)))
    C = np.stack(C_blocks, axis=1)
    A = np.stack(A_blocks, axis=2) if m else np.zeros((G, 0, len(C_blocks), 2, 2))
    b = np.stack(btr, axis=1) if m else np.zeros((G, 0))
    return C, A, b, V, owner


def _certificate(entries, D, red: _Reduction, Xh):
    """Dual matrices ``F`` in the full space from the reduced slack multipliers.

    Rank-1 entries get ``x |r><r| + kappa |r'><r'|`` with ``r'`` orthogonal to
    ``r``, zero entries ``kappa I``.  The reduced problem only constrains the
    range directions, so the cover ``sum_a,i D F >= I`` can miss by ``v``
    through range/kernel coupling; ``F / (1 - v)`` is then feasible.  Among
    powers of 4 for ``kappa``, the smallest rescaled objective whose
    certificate still measures feasible is kept, counting kernel overlaps
    at their absolute value so rounding noise cannot favour a huge ``kappa``.
    """
    G, n = entries.shape[:2]
    rank = red.rank[0]
    F = np.zeros((G, 2 * n, 2, 2), dtype=complex)
    perp = np.zeros_like(F)
    pos = 0
    for blk in range(2 * n):
        if rank[blk] == 2:
            F[:, blk] = Xh[:, pos]
            pos += 1
        elif rank[blk] == 1:
            r = red.rng[:, blk] / np.linalg.norm(red.rng[:, blk], axis=1, keepdims=True)
            rp = np.stack([-r[:, 1].conj(), r[:, 0].conj()], axis=1)
            x = np.maximum(Xh[:, pos, 0, 0].real, 0.0)
            F[:, blk] = x[:, None, None] * np.einsum("Bx,By->Bxy", r, r.conj())
            perp[:, blk] = np.einsum("Bx,By->Bxy", rp, rp.conj())
            pos += 1
        else:
            perp[:, blk] = np.eye(2)
    F = F.reshape(G, n, 2, 2, 2)
    perp = perp.reshape(G, n, 2, 2, 2)

    kq = np.einsum("Bioxy,Bioyx->Bio", perp, entries).real

    def rescaled(kappa):
        Fk = F + kappa * perp
        low = _min_eig(np.einsum("lio,Bioxy->Blxy", D, Fk)).min(axis=1)
        scale = 1.0 / np.clip(low, 1e-300, 1.0)
        Fk = Fk * scale[:, None, None, None, None]
        obj = np.einsum("Bioxy,Bioyx->B", Fk, entries).real
        # kernel overlaps are rounding noise of either sign; never let a
        # negative one make a larger kappa look better
        noise = np.abs(kq).sum(axis=(1, 2)) - kq.sum(axis=(1, 2))
        score = obj + kappa * scale * noise
        cover = np.einsum("lio,Bioxy->Blxy", D, Fk) - np.eye(2)
        viol = np.maximum(0.0, -np.minimum(_min_eig(Fk).reshape(G, -1).min(axis=1),
                                           _min_eig(cover).min(axis=1)))
        viol[low <= 0] = np.inf
        return Fk, score, viol

    if not perp.any():
        return rescaled(0.0)[0]
    best = np.zeros_like(F)
    best_key = np.full((G, 2), np.inf)
    for k in 4.0 ** np.arange(-4, 21):
        Fk, obj, viol = rescaled(k)
        # feasible-looking certificates first, then the smaller objective
        key = np.stack([np.where(viol <= 1e-12, 0.0, viol), obj], axis=1)
        better = (key[:, 0] < best_key[:, 0]) | ((key[:, 0] == best_key[:, 0]) & (key[:, 1] < best_key[:, 1]))
        best[better] = Fk[better]
        best_key[better] = key[better]
    return best


def _solve_group(entries, D, red: _Reduction, tol, max_iter):
    G, n = entries.shape[:2]
    n_lam = D.shape[0]
    full = bool((red.rank[0] == 2).all())
    if full:
        A, b, _ = _get_structure(n)
        C = np.zeros((G, 2 * n + n_lam, 2, 2), dtype=complex)
        C[:, :2 * n] = entries.reshape(G, 2 * n, 2, 2)
        V = np.broadcast_to(_HBASIS, (G, 4, 2, 2))
        V = np.tile(V, (1, n_lam, 1, 1))
        owner = np.repeat(np.arange(n_lam), 4)
        C = hermitian_to_real(C)
    else:
        C, A, b, V, owner = _reduced_problem(entries, D, red)
        C, A = hermitian_to_real(C), hermitian_to_real(A)
    n_slack_kept = int((red.rank[0] > 0).sum())
    if len(owner) == 0:
        sig = np.zeros((G, n_lam, 2, 2), dtype=complex)
        Xh = np.zeros((G, n_slack_kept, 2, 2), dtype=complex)
        status = [OPTIMAL] * G
        iters = np.zeros(G, dtype=int)
    else:
        res = solve_sdp(C, A, b, tol=tol, max_iter=max_iter)
        contrib = np.einsum("Bj,Bjxy->Bjxy", res.y, V)
        sig = np.zeros((G, n_lam, 2, 2), dtype=complex)
        np.add.at(sig, (slice(None), owner), contrib)
        Xh = 2.0 * real_to_hermitian(res.X[:, :n_slack_kept])
        status, iters = res.status, res.iterations
    F = _certificate(entries, D, red, Xh)
    return sig, F, status, iters


def ts_weight_batch(entries, tol: float = 1e-8, max_iter: int = 200) -> list[SdpSolution]:
    """Steering weight for a stack of assemblages of equal ``n``.

    ``entries`` has shape ``(B, n, 2, 2, 2)``.  Invalid assemblages come back
    with status ``infeasible-input`` and a NaN weight.  Instances are grouped
    by which entries are singular and each group is solved in one batch.
    """
    entries = np.asarray(entries, dtype=complex)
    if entries.ndim == 4:
        entries = entries[None]
    Bn, n = entries.shape[:2]
    D = deterministic_strategies(n).table
    n_lam = D.shape[0]

    bad = [Assemblage(e).violations() for e in entries]
    ok = np.array([not v for v in bad])
    results: list[SdpSolution | None] = [None] * Bn
    for idx in np.flatnonzero(~ok):
        results[idx] = SdpSolution(weight=float("nan"), sigma_tilde=np.full((n_lam, 2, 2), np.nan),
                                   dual=np.full((n, 2, 2, 2), np.nan), gap=float("nan"),
                                   status=INFEASIBLE_INPUT)
    if not ok.any():
        return results

    good_idx = np.flatnonzero(ok)
    good = entries[good_idx]
    red = _reduce(good, D)
    _, group = np.unique(red.signature(), axis=0, return_inverse=True)
    group = np.asarray(group).reshape(-1)
    for gid in np.unique(group):
        sel = np.flatnonzero(group == gid)
        sub = _Reduction(rank=red.rank[sel], rng=red.rng[sel], dim=red.dim[sel], vec=red.vec[sel])
        e = good[sel]
        sig, F, _, iters = _solve_group(e, D, sub, tol / 4, max_iter)
        pobj = np.einsum("Blii->B", sig).real
        dobj = np.einsum("Bioxy,Bioyx->B", F, e).real
        slack = e - np.einsum("lio,Blxy->Bioxy", D, sig)
        cover = np.einsum("lio,Bioxy->Blxy", D, F) - np.eye(2)
        p_viol = np.maximum(0.0, -np.minimum(_min_eig(sig).min(axis=1),
                                             _min_eig(slack).reshape(len(sel), -1).min(axis=1)))
        d_viol = np.maximum(0.0, -np.minimum(_min_eig(F).reshape(len(sel), -1).min(axis=1),
                                             _min_eig(cover).min(axis=1)))
        for pos, k in enumerate(sel):
            # the full-space certificate decides: a feasible pair with a small
            # gap is optimal even if the reduced iteration stopped short of tol/4
            certified = (abs(dobj[pos] - pobj[pos]) <= tol and p_viol[pos] <= tol
                         and d_viol[pos] <= tol)
            st = OPTIMAL if certified else MAX_ITERATIONS
            results[good_idx[k]] = SdpSolution(
                weight=float(1.0 - pobj[pos]), sigma_tilde=sig[pos], dual=F[pos],
                gap=float(dobj[pos] - pobj[pos]), status=st,
                primal_obj=float(pobj[pos]), dual_obj=float(dobj[pos]),
                primal_residual=float(p_viol[pos]), dual_residual=float(d_viol[pos]),
                iterations=int(iters[pos]),
            )
    if Bn > 1:
        # batched and single solves round differently; an ill-conditioned
        # instance that stalls inside a batch usually converges on its own
        for idx in np.flatnonzero(ok):
            if results[idx].status != OPTIMAL:
                results[idx] = ts_weight_batch(entries[idx:idx + 1], tol=tol, max_iter=max_iter)[0]
    return results


def ts_weight(asm: Assemblage, tol: float = 1e-8, max_iter: int = 200) -> SdpSolution:
    entries = asm.entries if isinstance(asm, Assemblage) else np.asarray(asm)
    return ts_weight_batch(entries[None], tol=tol, max_iter=max_iter)[0]
