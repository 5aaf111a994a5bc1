"""Independent reference computations used by the tests.

Nothing here imports the library's numerical kernels; each oracle takes
plain numpy arrays and follows a different route to the same quantity.
"""
import numpy as np


def schatten_via_eigh(blocks, weights, p):
    """Schatten norm from the eigenvalues of ``a* a`` (not from an SVD)."""
    svals = [np.sqrt(np.clip(np.linalg.eigvalsh(b.conj().T @ b), 0, None)) for b in blocks]
    if np.isinf(p):
        return max(s.max() for s in svals)
    return sum(w * np.sum(s ** p) for w, s in zip(weights, svals)) ** (1 / p)


def hilbert_schmidt(alpha):
    """``sqrt(sum_i ||alpha_i||_HS^2)``: row and column norms at p = 2."""
    return float(np.sqrt(np.sum(np.abs(alpha) ** 2)))


def classical_lewis_weights(R, p, mu=None, tol=1e-13, max_iter=100000):
    """Lewis weights of the rows of ``R`` by the scalar fixed point.

    ``w_t = (r_t^* (R^* diag(mu) W^{1-2/p} R)^{-1} r_t)^{p/2}`` for a point
    measure ``mu`` (counting measure by default). The plain iteration
    contracts for ``p < 4``; beyond that the geometric mean of the old and
    new weights is used.
    """
    R = np.asarray(R, dtype=np.complex128)
    m, n = R.shape
    mu = np.ones(m) if mu is None else np.asarray(mu, dtype=float)
    w = np.full(m, n / m)
    theta = 1.0 if p < 4 else 0.5
    for _ in range(max_iter):
        M = (R.conj().T * (mu * w ** (1 - 2 / p))) @ R
        lev = np.real(np.einsum("ti,ij,tj->t", R, np.linalg.inv(M), R.conj()))
        new = np.clip(lev, 0, None) ** (p / 2)
        new = w ** (1 - theta) * new ** theta
        if np.max(np.abs(new - w)) < tol:
            return new
        w = new
    raise RuntimeError("classical Lewis iteration did not converge")


def diagonal_sum_norm(alpha, p, grid=2001):
    """Sum norm of a family of diagonal matrices.

    The diagonal compression is contractive for row and column norms and
    they coincide on diagonal families, so the infimum is attained on the
    segment ``b = t alpha``. Scanned on a grid and refined by golden section.
    """
    d = np.array([np.diag(a) for a in alpha])

    def norm(v):
        s = np.sqrt(np.sum(np.abs(v) ** 2, axis=0))
        return np.max(s) if np.isinf(p) else np.sum(s ** p) ** (1 / p)

    def f(t):
        return norm(t * d) + norm((1 - t) * d)

    ts = np.linspace(-1.0, 2.0, grid)
    vals = np.array([f(t) for t in ts])
    i = int(np.argmin(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)]
    g = (np.sqrt(5) - 1) / 2
    for _ in range(200):
        a, b = hi - g * (hi - lo), lo + g * (hi - lo)
        if f(a) < f(b):
            hi = b
        else:
            lo = a
    return min(vals.min(), f((lo + hi) / 2))


def column_norm_dual(alpha, p, rng, samples=400, steps=300):
    """``column_norm(alpha, p)`` as a supremum of pairings over the ``p'`` column ball.

    Brute force: random directions, then projected ascent of
    ``Re <beta, alpha>`` with renormalization onto the unit sphere.
    """
    q = np.inf if p == 1 else (1.0 if np.isinf(p) else p / (p - 1))
    n, k, _ = alpha.shape

    def col(beta):
        s = np.linalg.svd(beta.reshape(n * k, k), compute_uv=False)
        return s.max() if np.isinf(q) else np.sum(s ** q) ** (1 / q)

    best = 0.0
    cands = [alpha] + [rng.standard_normal(alpha.shape) + 1j * rng.standard_normal(alpha.shape)
                       for _ in range(samples)]
    scored = sorted(cands, key=lambda b: -abs(np.vdot(b, alpha)) / col(b))[:8]
    for beta in scored:
        beta = beta / col(beta)
        step = 0.1
        val = abs(np.vdot(beta, alpha))
        for _ in range(steps):
            trial = beta + step * alpha * np.exp(1j * np.angle(np.vdot(beta, alpha)))
            trial = trial / col(trial)
            tv = abs(np.vdot(trial, alpha))
            if tv > val:
                beta, val = trial, tv
                step *= 1.2
            else:
                step *= 0.5
        best = max(best, val)
    return best


def numerical_rank(a, rel=1e-10):
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > rel * s.max())) if s.size and s.max() > 0 else 0


def finite_difference(f, z, h=1e-6):
    """Gradient ``df/dRe z + 1j df/dIm z`` by central differences."""
    z = np.asarray(z, dtype=np.complex128)
    g = np.zeros_like(z)
    it = np.nditer(z, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        for unit in (1.0, 1j):
            zp, zm = z.copy(), z.copy()
            zp[idx] += h * unit
            zm[idx] -= h * unit
            d = (f(zp) - f(zm)) / (2 * h)
            g[idx] += d * (1 if unit == 1.0 else 1j)
    return g
