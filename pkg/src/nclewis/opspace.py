"""
Amplified operator space norms
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Matrix-coefficient norms of row and column Hilbert spaces ``R_p^n``,
``C_p^n``, their intersection and sum, and of ``S_p^k[L_p(M)]``; plus
lower estimates of cb-norms obtained by sampled-and-ascended coefficient
families at each amplification level.

Level-``k`` elements of an n-dimensional coordinate space are stored as
complex arrays of shape ``(k, k, n)``: ``Y[:, :, i]`` is the coefficient
matrix ``alpha_i``. Elements of ``S_p^k[L_p(M)]`` use shape ``(k, k, dim)``,
``Y[a, b]`` being the vectorized ``(a, b)`` entry.
"""
from dataclasses import dataclass

import numpy as np

from ._ascent import maximize, minimize_complex
from .algebra import TracialAlgebra, _check_p
from .exceptions import ConvergenceError, DomainError

__all__ = [
    "column_norm",
    "row_norm",
    "intersection_norm",
    "sum_norm",
    "DecompositionWitness",
    "amplified_norm",
    "opposite_transpose_check",
    "ColumnSpace",
    "RowSpace",
    "IntersectionSpace",
    "SumSpace",
    "LpSpace",
    "Pullback",
    "CbEstimate",
    "cb_norm_profile",
    "cb_norm_lower_estimate",
    "conjugate_exponent",
    "tensor_cauchy_gap",
]


def conjugate_exponent(p):
    p = float(p)
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1)


def _schatten_blocks(blocks, weights, p):
    """Weighted Schatten norm of a block family and its gradient."""
    svds = [np.linalg.svd(b, full_matrices=False) for b in blocks]
    if np.isinf(p):
        tops = [s[0] if s.size else 0.0 for _, s, _ in svds]
        j = int(np.argmax(tops))
        grads = [np.zeros_like(b) for b in blocks]
        value = float(tops[j])
        if value > 0:
            u, _, vh = svds[j]
            grads[j] = np.outer(u[:, 0], vh[0])
        return value, grads
    total = sum(w * np.sum(s ** p) for w, (_, s, _) in zip(weights, svds))
    value = float(total ** (1.0 / p))
    if value == 0:
        return 0.0, [np.zeros_like(b) for b in blocks]
    scale = value ** (1.0 - p)
    grads = []
    for w, (u, s, vh) in zip(weights, svds):
        sp = np.where(s > 0, s, 0.0) ** (p - 1) if p != 1 else (s > 0).astype(float)
        grads.append(w * scale * (u * sp) @ vh)
    return value, grads


def _as_coeffs(coeffs):
    arr = np.asarray(coeffs, dtype=np.complex128)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DomainError(f"coefficient family must have shape (n, k, k), got {arr.shape}")
    return arr


def _column_stack(alpha):
    n, k, _ = alpha.shape
    return alpha.reshape(n * k, k)


def _row_stack(alpha):
    n, k, _ = alpha.shape
    return alpha.transpose(1, 0, 2).reshape(k, n * k)


def column_norm(coeffs, p):
    """``||(sum_i alpha_i* alpha_i)^(1/2)||_{S_p^k}``, the ``S_p^k[C_p^n]`` norm."""
    p = _check_p(p)
    alpha = _as_coeffs(coeffs)
    if alpha.shape[0] == 0:
        return 0.0
    return _schatten_blocks([_column_stack(alpha)], [1.0], p)[0]


def row_norm(coeffs, p):
    """``||(sum_i alpha_i alpha_i*)^(1/2)||_{S_p^k}``, the ``S_p^k[R_p^n]`` norm."""
    p = _check_p(p)
    alpha = _as_coeffs(coeffs)
    if alpha.shape[0] == 0:
        return 0.0
    return _schatten_blocks([_row_stack(alpha)], [1.0], p)[0]


def intersection_norm(coeffs, p):
    """``S_p^k[R_p^n \\cap C_p^n]`` norm: the larger of row and column norms."""
    return max(row_norm(coeffs, p), column_norm(coeffs, p))


@dataclass(frozen=True)
class DecompositionWitness:
    """Split ``alpha_i = row_part_i + column_part_i`` attaining ``value``."""

    row_part: np.ndarray
    column_part: np.ndarray
    value: float
    lower_bound: float

    @property
    def gap(self):
        return self.value - self.lower_bound


def _row_grad(alpha, p):
    n, k, _ = alpha.shape
    v, (g,) = _schatten_blocks([_row_stack(alpha)], [1.0], p)
    return v, g.reshape(k, n, k).transpose(1, 0, 2)


def _col_grad(alpha, p):
    n, k, _ = alpha.shape
    v, (g,) = _schatten_blocks([_column_stack(alpha)], [1.0], p)
    return v, g.reshape(n, k, k)


def _dual_value(alpha, beta, p):
    """Lower bound ``Re <alpha, beta> / max(row_p'(beta), col_p'(beta))``."""
    q = conjugate_exponent(p)
    denom = max(row_norm(beta, q), column_norm(beta, q))
    if denom == 0:
        return 0.0
    return float(np.real(np.vdot(beta, alpha))) / denom


def _sum_norm_sdp(alpha, p):
    import cvxpy as cp

    n, k, _ = alpha.shape
    br = cp.Variable((n * k, k))
    bi = cp.Variable((n * k, k))
    ar = _column_stack(alpha).real
    ai = _column_stack(alpha).imag

    def embed(re, im):
        return cp.bmat([[re, -im], [im, re]])

    col_re, col_im = ar - br, ai - bi
    row_re = cp.hstack([br[i * k:(i + 1) * k, :] for i in range(n)])
    row_im = cp.hstack([bi[i * k:(i + 1) * k, :] for i in range(n)])
    if p == 1:
        objective = 0.5 * (cp.normNuc(embed(row_re, row_im)) + cp.normNuc(embed(col_re, col_im)))
    else:
        objective = cp.sigma_max(embed(row_re, row_im)) + cp.sigma_max(embed(col_re, col_im))
    prob = cp.Problem(cp.Minimize(objective))
    prob.solve(solver=cp.CLARABEL)
    if br.value is None:
        raise ConvergenceError(f"SDP solver failed with status {prob.status}")
    b = (br.value + 1j * bi.value).reshape(n, k, k)
    return b, float(prob.value)


def sum_norm(coeffs, p, solver_tol=1e-8, restarts=8, max_iter=5000, seed=0):
    """Infimal decomposition norm of ``R_p^n + C_p^n`` at level k.

    Minimizes ``row_norm(b, p) + column_norm(alpha - b, p)`` over ``b``.
    For ``1 < p < inf`` the objective is smooth away from zero and is
    minimized by L-BFGS from several starts; the result is certified by a
    dual feasible point of the intersection norm with exponent ``p'``.
    ``p = 1`` and ``p = inf`` are solved as semidefinite programs.

    Returns
    -------
    value : float
        Objective at the returned split, an upper bound on the infimum.
    witness : DecompositionWitness

    Raises
    ------
    ConvergenceError
        If the duality gap stays above ``solver_tol * value``; the best
        witness is attached.
    """
    p = _check_p(p)
    alpha = _as_coeffs(coeffs)
    zero = np.zeros_like(alpha)
    if not np.any(alpha):
        return 0.0, DecompositionWitness(zero, zero, 0.0, 0.0)

    if p == 1 or np.isinf(p):
        b, _ = _sum_norm_sdp(alpha, p)
        value = row_norm(b, p) + column_norm(alpha - b, p)
        lower = max(_dual_value(alpha, alpha, p), 0.0)
        return value, DecompositionWitness(b, alpha - b, value, lower)

    def objective(b):
        vr, gr = _row_grad(b, p)
        vc, gc = _col_grad(alpha - b, p)
        return vr + vc, gr - gc

    rng = np.random.default_rng(seed)
    starts = [t * alpha for t in np.linspace(0.0, 1.0, min(restarts, 3))]
    while len(starts) < restarts:
        noise = rng.standard_normal(alpha.shape) + 1j * rng.standard_normal(alpha.shape)
        starts.append(rng.uniform() * alpha + 0.1 * np.linalg.norm(alpha) * noise / np.linalg.norm(noise))

    best_val, best_b = np.inf, None
    for b0 in starts:
        val, b, _ = minimize_complex(objective, b0, maxiter=max_iter)
        val = row_norm(b, p) + column_norm(alpha - b, p)
        if val < best_val:
            best_val, best_b = val, b

    candidates = [_col_grad(alpha - best_b, p)[1], _row_grad(best_b, p)[1], alpha]
    lower = max(_dual_value(alpha, beta, p) for beta in candidates)
    tol = solver_tol * best_val
    if best_val - lower > tol:
        q = conjugate_exponent(p)

        def dual_objective(beta):
            inner = float(np.real(np.vdot(beta, alpha)))
            vr, gr = _row_grad(beta, q)
            vc, gc = _col_grad(beta, q)
            if vr >= vc:
                return inner - best_val * vr, alpha - best_val * gr
            return inner - best_val * vc, alpha - best_val * gc

        beta0 = max(candidates, key=lambda b: _dual_value(alpha, b, p))
        _, beta = maximize(dual_objective, beta0, maxiter=max_iter)
        lower = max(lower, _dual_value(alpha, beta, p))

    witness = DecompositionWitness(best_b, alpha - best_b, best_val, lower)
    if best_val - lower > tol:
        raise ConvergenceError(
            f"sum_norm duality gap {best_val - lower:.3e} exceeds tolerance {tol:.3e}", best=witness)
    return best_val, witness


# --------------------------------------------------------------------------
# level-k spaces


class _CoordinateSpace:
    def __init__(self, n, p):
        self.n = int(n)
        self.p = _check_p(p)

    @property
    def dim(self):
        return self.n

    def norm(self, Y):
        return self.norm_grad(Y)[0]

    def structured_starts(self, k):
        """Elementary families ``e_{1i}``, ``e_{i1}``, ``e_{ii}`` (truncated to level k)."""
        out = []
        m = min(k, self.n)
        for pattern in ("row", "col", "diag"):
            Y = np.zeros((k, k, self.n), dtype=np.complex128)
            for i in range(m):
                a, b = {"row": (0, i), "col": (i, 0), "diag": (i, i)}[pattern]
                Y[a, b, i] = 1.0
            out.append(Y)
        return out

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, p={self.p})"


class ColumnSpace(_CoordinateSpace):
    """``C_p^n``."""

    def norm_grad(self, Y):
        v, g = _col_grad(np.moveaxis(Y, 2, 0), self.p)
        return v, np.moveaxis(g, 0, 2)


class RowSpace(_CoordinateSpace):
    """``R_p^n``."""

    def norm_grad(self, Y):
        v, g = _row_grad(np.moveaxis(Y, 2, 0), self.p)
        return v, np.moveaxis(g, 0, 2)


class IntersectionSpace(_CoordinateSpace):
    """``R_p^n \\cap C_p^n`` with the max-norm at every level."""

    def norm_grad(self, Y):
        alpha = np.moveaxis(Y, 2, 0)
        vr, gr = _row_grad(alpha, self.p)
        vc, gc = _col_grad(alpha, self.p)
        if vr >= vc:
            return vr, np.moveaxis(gr, 0, 2)
        return vc, np.moveaxis(gc, 0, 2)


class SumSpace(_CoordinateSpace):
    """``R_p^n + C_p^n``; its norm is an infimum, evaluated by :func:`sum_norm`."""

    def norm(self, Y):
        return sum_norm(np.moveaxis(Y, 2, 0), self.p)[0]

    def norm_grad(self, Y):
        raise NotImplementedError("SumSpace norms are handled through the dual intersection norm")

    def dual(self):
        return IntersectionSpace(self.n, conjugate_exponent(self.p))


class LpSpace:
    """``S_p^k[L_p(M)] = L_p(M_k (x) M)`` in entrywise-vectorized form."""

    def __init__(self, algebra, p):
        if not isinstance(algebra, TracialAlgebra):
            raise DomainError("LpSpace needs a TracialAlgebra")
        self.algebra = algebra
        self.p = _check_p(p)
        self._offsets = np.cumsum([0] + [m * m for m in algebra.block_dims])

    @property
    def dim(self):
        return self.algebra.dim

    def blocks(self, Y):
        k = Y.shape[0]
        out = []
        for m, o in zip(self.algebra.block_dims, self._offsets):
            t = Y[:, :, o:o + m * m].reshape(k, k, m, m)
            out.append(t.transpose(0, 2, 1, 3).reshape(k * m, k * m))
        return out

    def norm_grad(self, Y):
        k = Y.shape[0]
        value, grads = _schatten_blocks(self.blocks(Y), self.algebra.trace_weights, self.p)
        G = np.empty_like(Y)
        for m, o, g in zip(self.algebra.block_dims, self._offsets, grads):
            G[:, :, o:o + m * m] = g.reshape(k, m, k, m).transpose(0, 2, 1, 3).reshape(k, k, m * m)
        return value, G

    def norm(self, Y):
        return _schatten_blocks(self.blocks(Y), self.algebra.trace_weights, self.p)[0]

    def structured_starts(self, k):
        return []

    def __repr__(self):
        return f"LpSpace({self.algebra.block_dims}, p={self.p})"


class Pullback:
    """Norm ``Y -> base.norm(Y @ S.T)``; e.g. a subspace in its basis coordinates."""

    def __init__(self, base, synthesis):
        self.base = base
        self.synthesis = np.asarray(synthesis, dtype=np.complex128)
        self.p = base.p

    @property
    def dim(self):
        return self.synthesis.shape[1]

    def norm_grad(self, Y):
        v, G = self.base.norm_grad(Y @ self.synthesis.T)
        return v, G @ self.synthesis.conj()

    def norm(self, Y):
        return self.base.norm(Y @ self.synthesis.T)

    def structured_starts(self, k):
        n = self.dim
        return _CoordinateSpace(n, 2).structured_starts(k)


def amplified_norm(algebra, coeffs, ops, p):
    """``||sum_i alpha_i (x) x_i||`` in ``L_p(M_k (x) M)``."""
    alpha = _as_coeffs(coeffs)
    V = np.array([algebra.vec(x) for x in ops])
    Y = np.einsum("iab,id->abd", alpha, V)
    return LpSpace(algebra, p).norm(Y)


def opposite_transpose_check(E, coeffs, p):
    """Both sides of the opposite-space identity at matrix level.

    ``coeffs[i, j]`` holds the coordinates of the entry ``x_ij`` in the
    basis of ``E``. Returns ``(lhs, rhs)`` with ``lhs`` the
    ``S_p^N[L_p(M)]`` norm of ``[x_ij^T]`` (entrywise transposes) and ``rhs``
    that of ``[x_ji]``.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    N = c.shape[0]
    if c.shape[:2] != (N, N) or c.shape[2] != E.n:
        raise DomainError(f"coefficient array must have shape (N, N, {E.n}), got {c.shape}")
    alg = E.algebra
    ops = [[alg.unvec(c[i, j] @ E.coords()) for j in range(N)] for i in range(N)]
    lhs_Y = np.array([[alg.vec(ops[i][j].T) for j in range(N)] for i in range(N)])
    rhs_Y = np.array([[alg.vec(ops[j][i]) for j in range(N)] for i in range(N)])
    space = LpSpace(alg, p)
    return space.norm(lhs_Y), space.norm(rhs_Y)


# --------------------------------------------------------------------------
# cb-norm lower estimates


@dataclass(frozen=True)
class CbEstimate:
    """Measured ratio ``||T Y||_dst / ||Y||_src`` at one amplification level."""

    level: int
    value: float
    witness: np.ndarray
    source: str = ""


SCREEN_ITER = 40
FINALISTS = 4


def _lift(Y, k):
    out = np.zeros((k, k) + Y.shape[2:], dtype=np.complex128)
    j = Y.shape[0]
    out[:j, :j] = Y
    return out


def _random_family(rng, k, dim):
    return rng.standard_normal((k, k, dim)) + 1j * rng.standard_normal((k, k, dim))


def _ratio_profile(T, src, dst, k_max, trials, restarts, rng, maxiter):
    dual = dst.dual() if isinstance(dst, SumSpace) else None
    n_out = T.shape[0]
    results, prev = [], None

    def plain(Y):
        vs, gs = src.norm_grad(Y)
        Z = Y @ T.T
        vd, gd = dst.norm_grad(Z)
        if vs <= 0 or vd <= 0:
            return -np.inf, np.zeros_like(Y)
        return np.log(vd) - np.log(vs), gd @ T.conj() / vd - gs / vs

    def dualized(W):
        Y, beta = W[..., :src.dim], W[..., src.dim:]
        vs, gs = src.norm_grad(Y)
        Z = Y @ T.T
        inner = float(np.real(np.vdot(beta, Z)))
        vb, gb = dual.norm_grad(beta)
        if vs <= 0 or vb <= 0 or inner <= 0:
            return -np.inf, np.zeros_like(W)
        gY = beta @ T.conj() / inner - gs / vs
        gB = Z / inner - gb / vb
        return np.log(inner) - np.log(vb) - np.log(vs), np.concatenate([gY, gB], axis=-1)

    objective = dualized if dual is not None else plain

    def pack(Y):
        return np.concatenate([Y, Y @ T.T], axis=-1) if dual is not None else Y

    for k in range(1, k_max + 1):
        cands = [pack(_random_family(rng, k, src.dim)) for _ in range(trials)]
        scored = sorted(((objective(W)[0], i) for i, W in enumerate(cands)), reverse=True)
        starts = [cands[i] for _, i in scored[:restarts]]
        starts += [pack(Y) for Y in src.structured_starts(k)]
        if prev is not None:
            starts.append(_lift(prev.witness_raw, k))
        # short ascent from every start, full ascent from the best few
        short = [maximize(objective, W0, maxiter=min(SCREEN_ITER, maxiter)) for W0 in starts]
        short.sort(key=lambda vw: -vw[0])
        best_v, best_W = short[0] if short else (-np.inf, None)
        for _, W0 in short[:FINALISTS]:
            v, W = maximize(objective, W0, maxiter=maxiter)
            if v > best_v:
                best_v, best_W = v, W
        value = float(np.exp(best_v)) if np.isfinite(best_v) else 0.0
        if prev is not None and prev.value >= value:
            value, best_W = prev.value, _lift(prev.witness_raw, k)
        Y = best_W[..., :src.dim]
        est = _Tracked(k, value, Y, best_W)
        results.append(est)
        prev = est
    return results


@dataclass
class _Tracked:
    level: int
    value: float
    witness: np.ndarray
    witness_raw: np.ndarray


def cb_norm_profile(T, src, dst, k_max=4, trials=200, restarts=16, seed=0, maxiter=400):
    """Lower estimates of the amplified norms of ``T`` at levels ``1..k_max``.

    At each level ``trials`` random coefficient families are scored, the
    best ``restarts`` of them (plus elementary families and the best witness
    of the previous level, zero padded) are improved by a short L-BFGS
    ascent on the log norm ratio, and the best few of those are ascended to
    ``maxiter``. Values are non-decreasing in the level by construction.

    Parameters
    ----------
    T : ndarray of shape (dst.dim, src.dim) or None
        Map in coordinates; ``None`` means the identity.
    src, dst : level-k spaces
        A :class:`SumSpace` target is handled through its dual intersection
        norm; a :class:`SumSpace` source through ``max`` over its row and
        column summands, which is exact for sums.

    Returns
    -------
    list of CbEstimate
    """
    if k_max < 1 or trials < 1:
        raise DomainError("k_max and trials must be at least 1")
    T = np.eye(src.dim, dtype=np.complex128) if T is None else np.asarray(T, dtype=np.complex128)
    if T.shape != (dst.dim, src.dim):
        raise DomainError(f"map has shape {T.shape}, expected {(dst.dim, src.dim)}")
    if not np.any(T):
        return [CbEstimate(k, 0.0, np.zeros((k, k, src.dim))) for k in range(1, k_max + 1)]
    rng = np.random.default_rng(seed)
    if isinstance(src, SumSpace):
        parts = {}
        for name, piece in (("row", RowSpace(src.n, src.p)), ("column", ColumnSpace(src.n, src.p))):
            parts[name] = _ratio_profile(T, piece, dst, k_max, trials, restarts, rng, maxiter)
        out = []
        for r, c in zip(parts["row"], parts["column"]):
            best, name = (r, "row") if r.value >= c.value else (c, "column")
            out.append(CbEstimate(best.level, best.value, best.witness, name))
        return out
    prof = _ratio_profile(T, src, dst, k_max, trials, restarts, rng, maxiter)
    return [CbEstimate(t.level, t.value, t.witness) for t in prof]


def cb_norm_lower_estimate(T, src, dst, k, trials=200, restarts=16, seed=0):
    """Lower estimate of the level-``k`` amplified norm (levels ``1..k`` are lifted upward)."""
    return cb_norm_profile(T, src, dst, k_max=k, trials=trials, restarts=restarts, seed=seed)[-1].value


def tensor_cauchy_gap(algebra, coeffs, ops):
    """Smallest eigenvalue of ``2 (sum a_i* a_i) (x) (sum x_i* x_i) - |sum a_i (x) x_i|^2``.

    The operator is PSD by the tensor Cauchy-Schwarz inequality; the value
    is relative to the largest eigenvalue of the first term.
    """
    alpha = _as_coeffs(coeffs)
    ops = list(ops)
    if len(ops) != alpha.shape[0]:
        raise DomainError("one coefficient per operator is required")
    aa = sum(a.conj().T @ a for a in alpha)
    worst = np.inf
    for j in range(algebra.n_blocks):
        xs = [x.blocks[j] for x in ops]
        xx = sum(x.conj().T @ x for x in xs)
        T = sum(np.kron(a, x) for a, x in zip(alpha, xs))
        lead = 2 * np.kron(aa, xx)
        M = lead - T.conj().T @ T
        lam = np.linalg.eigvalsh((M + M.conj().T) / 2)
        scale = max(np.linalg.eigvalsh((lead + lead.conj().T) / 2).max(), 1e-300)
        worst = min(worst, lam[0] / scale)
    return float(worst)
