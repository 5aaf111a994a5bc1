"""
Lewis bases of subspaces of noncommutative L_p
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
A Lewis basis ``(x_i)`` of an n-dimensional ``E`` satisfies, with
``X = (sum x_i* x_i)^(1/2)`` and ``q = supp X``::

    tau(X^p) = n,        tau(X^{p-2}_q x_i* x_j) = delta_ij

(``X^{p-2}_q`` is the inverse power on the corner ``q M q``; for ``p >= 2``
it is the ordinary power). Two independent routes are provided:

* :func:`lewis_basis` iterates Gram re-orthonormalization under the current
  density; its fixed points are exactly the conditions above.
* :func:`detmax_oracle` maximizes ``|det|`` of the coordinate matrix over
  the sphere ``||X||_p = n^(1/p)``, the extremal problem whose maximizers
  are Lewis bases. It is a brute-force cross-check for small instances.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from .algebra import (
    DEFAULT_EPS_REL,
    Subspace,
    column_square_function,
    power_on_support,
    support,
    trace,
)
from .exceptions import BasisCollapseError, DomainError, OracleCapError

__all__ = ["LewisBasisResult", "ConditionReport", "lewis_basis", "detmax_oracle",
           "verify_conditions", "default_damping"]

GRAM_FLOOR = 1e-14


@dataclass(frozen=True)
class LewisBasisResult:
    """Normalized basis together with its square function and density.

    Attributes
    ----------
    subspace : Subspace
        The input subspace.
    coef : ndarray (n, n)
        ``basis[j] = sum_i input[i] * coef[i, j]``; upper triangular with a
        positive diagonal.
    X : Op
        Column square function of the basis.
    density : Op
        ``X^{p-2}`` on the support of ``X`` (q-inverse power when ``p < 2``).
    """

    subspace: Subspace
    p: float
    coef: np.ndarray
    basis: tuple
    X: object
    density: object
    gram_residual: float
    normalization_residual: float
    n_iter: int
    converged: bool
    history: tuple = field(default=(), repr=False)

    @property
    def n(self):
        return len(self.basis)

    @property
    def algebra(self):
        return self.subspace.algebra

    def basis_subspace(self):
        return Subspace(self.algebra, self.basis)

    def density_power(self):
        """``X^p``, the density of the change of measure."""
        return power_on_support(self.algebra, self.X, self.p)


def default_damping(p):
    return 1.0 if p < 4 else 0.5


def _check_lewis_p(p):
    p = float(p)
    if not (1 <= p < np.inf):
        raise DomainError(f"Lewis bases need 1 <= p < inf, got {p}")
    return p


def _density_state(alg, W, p, eps_rel):
    """Square-function data for the basis whose vectorized rows are ``W``.

    Returns ``(tau(X^p), gram, X blocks, density blocks)`` where
    ``gram[i, j] = tau(D x_i* x_j)``.
    """
    n = W.shape[0]
    pos = 0
    pieces, eigs = [], []
    for m in alg.block_dims:
        A = W[:, pos:pos + m * m].reshape(n, m, m)
        pos += m * m
        S = np.einsum("irs,irt->st", A.conj(), A)
        lam, U = np.linalg.eigh((S + S.conj().T) / 2)
        pieces.append(A)
        eigs.append((lam, U))
    top = max(float(lam.max()) for lam, _ in eigs)
    cut = eps_rel * top
    tau_xp = 0.0
    G = np.zeros((n, n), dtype=np.complex128)
    X_blocks, D_blocks = [], []
    for w, A, (lam, U) in zip(alg.trace_weights, pieces, eigs):
        keep = lam > cut
        lk = np.where(keep, lam, 1.0)
        fX = np.where(keep, np.sqrt(lk), 0.0)
        fD = np.where(keep, lk ** ((p - 2) / 2), 0.0)
        tau_xp += w * float(np.sum(np.where(keep, lk ** (p / 2), 0.0)))
        D = (U * fD) @ U.conj().T
        X_blocks.append((U * fX) @ U.conj().T)
        D_blocks.append(D)
        G += w * np.einsum("irs,jrs->ij", A.conj(), A @ D)
    return tau_xp, G, X_blocks, D_blocks


def _inv_sqrt_power(G, theta):
    lam, U = np.linalg.eigh((G + G.conj().T) / 2)
    if lam.min() < GRAM_FLOOR:
        raise BasisCollapseError(f"density Gram matrix is singular (eigenvalue {lam.min():.3e})")
    return (U * lam ** (-theta / 2)) @ U.conj().T


def _canonical(C):
    """Right-multiply by a unitary so that ``C`` is upper triangular with positive diagonal."""
    R, Q = scipy.linalg.rq(C)
    d = np.diag(R)
    phase = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return R * phase.conj()[None, :]


def _package(E, p, C, eps_rel, n_iter, converged, history):
    alg = E.algebra
    V = E.coords()
    W = C.T @ V
    tau_xp, G, X_blocks, D_blocks = _density_state(alg, W, p, eps_rel)
    n = E.n
    basis = tuple(alg.unvec(w) for w in W)
    return LewisBasisResult(
        subspace=E,
        p=p,
        coef=C,
        basis=basis,
        X=alg.op(X_blocks),
        density=alg.op(D_blocks),
        gram_residual=float(np.linalg.norm(G - np.eye(n))),
        normalization_residual=abs(tau_xp - n),
        n_iter=n_iter,
        converged=converged,
        history=tuple(history),
    )


def lewis_basis(E, p, tol=1e-9, max_iter=2000, damping=None, eps_rel=DEFAULT_EPS_REL):
    """Lewis basis of ``E`` by density-weighted Gram re-orthonormalization.

    Each sweep computes ``X`` and the density ``D = X^{p-2}_q`` of the
    current basis, the Gram matrix ``G_ij = tau(D x_i* x_j)``, replaces the
    basis by ``x G^{-damping/2}`` and rescales it so that ``tau(X^p) = n``.
    The scheme is stationary exactly at the Lewis conditions.

    Parameters
    ----------
    E : Subspace
    p : float
        ``1 <= p < inf``.
    tol : float
        Stop once ``||G - I||_F < tol``.
    damping : float, optional
        Exponent blend in ``(0, 1]``; defaults to 1 for ``p < 4`` and 0.5
        otherwise (undamped sweeps stop contracting at ``p = 4``).

    Returns
    -------
    LewisBasisResult
        ``converged`` is False if ``max_iter`` was hit; the best iterate
        is returned in that case.
    """
    p = _check_lewis_p(p)
    theta = default_damping(p) if damping is None else float(damping)
    if not 0 < theta <= 1:
        raise DomainError(f"damping must lie in (0, 1], got {theta}")
    alg = E.algebra
    n = E.n
    V = E.coords()
    C = np.eye(n, dtype=np.complex128)
    history = []
    best = (np.inf, C, 0)
    converged = False
    it = 0
    for it in range(max_iter + 1):
        tau_xp, _, _, _ = _density_state(alg, C.T @ V, p, eps_rel)
        C = C * (n / tau_xp) ** (1.0 / p)
        _, G, _, _ = _density_state(alg, C.T @ V, p, eps_rel)
        res = float(np.linalg.norm(G - np.eye(n)))
        history.append(res)
        if res < best[0]:
            best = (res, C, it)
        if res < tol:
            converged = True
            break
        if it == max_iter:
            break
        C = C @ _inv_sqrt_power(G, theta)
    C = best[1] if not converged else C
    return _package(E, p, _canonical(C), eps_rel, it, converged, history)


def _triangular_from_params(x, n):
    C = np.zeros((n, n), dtype=np.complex128)
    C[np.diag_indices(n)] = np.exp(x[:n])
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    C[iu] = x[n:n + m] + 1j * x[n + m:]
    return C


def detmax_oracle(E, p, restarts=8, seed=0, max_dim=64, max_n=4, eps_rel=DEFAULT_EPS_REL):
    """Lewis basis from the determinant-maximization problem (brute force).

    Maximizes ``log|det C| - (n/p) log tau(X(C)^p)`` over upper triangular
    coordinate changes ``C`` with positive diagonal (every basis of ``E`` is
    such a ``C`` times a unitary, which changes neither quantity), starting
    from ``restarts`` random points. The objective is scale invariant; the
    maximizer is rescaled onto ``tau(X^p) = n``.

    Raises
    ------
    OracleCapError
        If ``dim M > max_dim`` or ``n > max_n``.
    """
    p = _check_lewis_p(p)
    alg = E.algebra
    n = E.n
    if alg.dim > max_dim or n > max_n:
        raise OracleCapError(f"oracle capped at dim <= {max_dim}, n <= {max_n}; got dim={alg.dim}, n={n}")
    V = E.coords()
    iu = np.triu_indices(n, 1)

    def negf(x):
        C = _triangular_from_params(x, n)
        tau_xp, _, _, D_blocks = _density_state(alg, C.T @ V, p, eps_rel)
        H = _basis_gram(alg, V, D_blocks)
        K = H @ C
        GC = np.linalg.inv(C).conj().T - (n / tau_xp) * K
        f = float(np.sum(x[:n])) - (n / p) * np.log(tau_xp)
        g_diag = np.real(np.diag(GC) * np.diag(C))
        g_up = GC[iu]
        grad = np.concatenate([g_diag, g_up.real, g_up.imag])
        return -f, -grad

    rng = np.random.default_rng(seed)
    m = len(iu[0])
    best_f, best_x = np.inf, None
    for r in range(restarts):
        x0 = np.concatenate([0.3 * rng.standard_normal(n), rng.standard_normal(2 * m)]) if r else np.zeros(n + 2 * m)
        res = minimize(negf, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 20000, "gtol": 1e-13, "ftol": 1e-16, "maxcor": 30})
        res = minimize(negf, res.x, jac=True, method="BFGS", options={"maxiter": 2000, "gtol": 1e-12})
        if res.fun < best_f:
            best_f, best_x = res.fun, res.x
    C = _triangular_from_params(best_x, n)
    tau_xp, _, _, _ = _density_state(alg, C.T @ V, p, eps_rel)
    C = C * (n / tau_xp) ** (1.0 / p)
    return _package(E, p, _canonical(C), eps_rel, restarts, True, ())


def _basis_gram(alg, V, D_blocks):
    """``H[i, l] = tau(D e_i* e_l)`` for the input basis rows ``V``."""
    n = V.shape[0]
    H = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for w, m, D in zip(alg.trace_weights, alg.block_dims, D_blocks):
        A = V[:, pos:pos + m * m].reshape(n, m, m)
        pos += m * m
        H += w * np.einsum("irs,jrs->ij", A.conj(), A @ D)
    return H


@dataclass(frozen=True)
class ConditionReport:
    """Residuals of the Lewis conditions, recomputed from the basis alone."""

    normalization_residual: float
    gram_residual: float
    gram_hermitian_residual: float
    support_residual: float

    def ok(self, tol):
        return max(self.normalization_residual, self.gram_residual, self.support_residual) < tol


def verify_conditions(result, p=None, eps_rel=DEFAULT_EPS_REL):
    """Recompute every Lewis residual of ``result`` from its basis.

    The support residual is ``max_i ||q x_i* - x_i*||`` with ``q = supp X``;
    it is what makes the q-inverse density legitimate when ``X`` is
    singular.
    """
    p = _check_lewis_p(result.p if p is None else p)
    E = result.basis_subspace()
    alg = E.algebra
    X = column_square_function(E)
    Xp = power_on_support(alg, X, p, eps_rel)
    D = power_on_support(alg, X, p - 2, eps_rel)
    n = E.n
    G = np.array([[trace(alg, D @ xi.H @ xj) for xj in E.basis] for xi in E.basis])
    q = support(alg, X, eps_rel)
    sup_res = max((q @ x.H - x.H).max_abs() for x in E.basis)
    scale = max(x.max_abs() for x in E.basis)
    return ConditionReport(
        normalization_residual=abs(trace(alg, Xp).real - n),
        gram_residual=float(np.linalg.norm(G - np.eye(n))),
        gram_hermitian_residual=float(np.max(np.abs(G - G.conj().T))),
        support_residual=float(sup_res / max(scale, 1e-300)),
    )
