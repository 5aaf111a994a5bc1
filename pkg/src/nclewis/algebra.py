"""
Weighted-trace block matrix algebras
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
A finite dimensional semifinite algebra is modelled as a block diagonal
matrix algebra ``M = M_{m_1} (+) ... (+) M_{m_K}`` with the faithful trace
``tau(x) = sum_k w_k Tr(x_k)``. Every element is in every ``L_p(M)``, so an
:class:`Op` is simply a tuple of square complex blocks.

All spectral functions go through the Hermitian eigendecomposition (or the
SVD) of each block. Support projections use a relative cutoff, since exact
supports do not survive floating point.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, ShapeError

__all__ = [
    "TracialAlgebra",
    "Op",
    "Subspace",
    "trace",
    "inner",
    "schatten_norm",
    "singular_values",
    "polar",
    "support",
    "power_on_support",
    "column_square_function",
    "DEFAULT_EPS_REL",
]

DEFAULT_EPS_REL = 1e-10
HERMITIAN_TOL = 1e-8


class Op:
    """Block diagonal complex matrix; an element of ``L_p(M)`` for every p.

    Instances are immutable: the blocks are copied on construction and
    marked read-only, so an ``Op`` can be shared freely between threads.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        frozen = []
        for b in blocks:
            arr = np.array(b, dtype=np.complex128, copy=True)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ShapeError(f"blocks must be square matrices, got shape {arr.shape}")
            arr.setflags(write=False)
            frozen.append(arr)
        self.blocks = tuple(frozen)

    @property
    def shape(self):
        return tuple(b.shape[0] for b in self.blocks)

    def _check_compatible(self, other):
        if not isinstance(other, Op):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeError(f"block shapes differ: {self.shape} vs {other.shape}")
        return None

    def __add__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return Op([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return Op([a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return Op([-a for a in self.blocks])

    def __mul__(self, scalar):
        if isinstance(scalar, Op):
            return NotImplemented
        return Op([scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Op([a / scalar for a in self.blocks])

    def __matmul__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return Op([a @ b for a, b in zip(self.blocks, other.blocks)])

    @property
    def H(self):
        """Adjoint ``x*``."""
        return Op([a.conj().T for a in self.blocks])

    @property
    def T(self):
        """Blockwise transpose; realizes the opposite algebra at matrix level."""
        return Op([a.T for a in self.blocks])

    def conj(self):
        return Op([a.conj() for a in self.blocks])

    def max_abs(self):
        return max((float(np.max(np.abs(b))) if b.size else 0.0) for b in self.blocks)

    def allclose(self, other, atol=1e-10):
        return self.shape == other.shape and (self - other).max_abs() <= atol

    def __repr__(self):
        return f"Op(shape={self.shape})"


@dataclass(frozen=True)
class TracialAlgebra:
    """Block algebra ``(+)_k M_{m_k}`` with trace weights ``w_k > 0``.

    Parameters
    ----------
    block_dims : sequence of int
        Block sizes ``m_1..m_K``; all blocks 1x1 gives the commutative case.
    trace_weights : sequence of float, optional
        Positive finite weights; defaults to all ones (the usual trace).
    """

    block_dims: tuple
    trace_weights: tuple = None

    def __post_init__(self):
        dims = tuple(int(m) for m in self.block_dims)
        if not dims or any(m < 1 for m in dims):
            raise DomainError(f"block_dims must be positive integers, got {self.block_dims!r}")
        weights = self.trace_weights
        if weights is None:
            weights = (1.0,) * len(dims)
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(dims):
            raise ShapeError("trace_weights and block_dims differ in length")
        if not all(np.isfinite(w) and w > 0 for w in weights):
            raise DomainError(f"trace weights must be positive and finite, got {weights!r}")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "trace_weights", weights)

    @property
    def n_blocks(self):
        return len(self.block_dims)

    @property
    def dim(self):
        """Complex dimension of the algebra, ``sum m_k**2``."""
        return sum(m * m for m in self.block_dims)

    def check(self, a):
        if not isinstance(a, Op):
            raise ShapeError(f"expected Op, got {type(a).__name__}")
        if a.shape != self.block_dims:
            raise ShapeError(f"op has block shape {a.shape}, algebra has {self.block_dims}")

    def op(self, blocks):
        a = Op(blocks)
        self.check(a)
        return a

    def zeros(self):
        return Op([np.zeros((m, m)) for m in self.block_dims])

    def identity(self):
        return Op([np.eye(m) for m in self.block_dims])

    def random_op(self, rng, hermitian=False):
        blocks = []
        for m in self.block_dims:
            g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            if hermitian:
                g = (g + g.conj().T) / 2
            blocks.append(g)
        return Op(blocks)

    def random_unitary(self, rng):
        blocks = []
        for m in self.block_dims:
            g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            q, r = np.linalg.qr(g)
            blocks.append(q * (np.diag(r) / np.abs(np.diag(r))))
        return Op(blocks)

    def vec(self, a):
        """Row-major concatenation of all blocks, length :attr:`dim`."""
        self.check(a)
        return np.concatenate([b.ravel() for b in a.blocks])

    def unvec(self, v):
        v = np.asarray(v, dtype=np.complex128)
        if v.shape != (self.dim,):
            raise ShapeError(f"vector of length {self.dim} expected, got shape {v.shape}")
        blocks, pos = [], 0
        for m in self.block_dims:
            blocks.append(v[pos:pos + m * m].reshape(m, m))
            pos += m * m
        return Op(blocks)

    def weight_vector(self):
        """Trace weight attached to each coordinate of :meth:`vec`."""
        return np.concatenate([np.full(m * m, w) for m, w in zip(self.block_dims, self.trace_weights)])

    def amplify(self, k):
        """``M_k (x) M``: same weights, blocks of size ``k * m``."""
        return TracialAlgebra(tuple(k * m for m in self.block_dims), self.trace_weights)

    def doubled(self):
        """``M (+) M^op``; the second summand stores transposed copies."""
        return TracialAlgebra(self.block_dims * 2, self.trace_weights * 2)


def trace(alg, a):
    """``tau(a) = sum_k w_k Tr(a_k)``."""
    alg.check(a)
    return complex(sum(w * np.trace(b) for w, b in zip(alg.trace_weights, a.blocks)))


def inner(alg, a, b):
    """Trace inner product ``tau(b* a)`` (linear in ``a``)."""
    alg.check(a)
    alg.check(b)
    return complex(sum(w * np.vdot(bb, ab) for w, ab, bb in zip(alg.trace_weights, a.blocks, b.blocks)))


def singular_values(alg, a):
    """Per-block singular values (no weights applied)."""
    alg.check(a)
    return [np.linalg.svd(b, compute_uv=False) for b in a.blocks]


def _check_p(p):
    p = float(p)
    if not p >= 1:
        raise DomainError(f"Schatten exponent must satisfy p >= 1, got {p}")
    return p


def schatten_norm(alg, a, p):
    """``tau(|a|^p)^(1/p)``; ``p = inf`` gives the largest singular value."""
    p = _check_p(p)
    svals = singular_values(alg, a)
    if np.isinf(p):
        return float(max((s.max() if s.size else 0.0) for s in svals))
    total = sum(w * np.sum(s ** p) for w, s in zip(alg.trace_weights, svals))
    return float(total ** (1.0 / p))


def _cutoff(values, eps_rel):
    top = max((float(np.max(v)) if v.size else 0.0) for v in values)
    return eps_rel * top, top


def polar(alg, a, eps_rel=DEFAULT_EPS_REL):
    """Polar decomposition ``a = v |a|`` with ``v* v = supp(|a|)``.

    Returns
    -------
    v : Op
        Partial isometry whose initial space is the range of ``|a|``.
    absa : Op
        ``|a| = (a* a)^(1/2)``.
    """
    alg.check(a)
    svds = [np.linalg.svd(b) for b in a.blocks]
    cut, top = _cutoff([s for _, s, _ in svds], eps_rel)
    vs, abss = [], []
    for u, s, vh in svds:
        keep = s > cut if top > 0 else np.zeros_like(s, dtype=bool)
        vs.append(u[:, keep] @ vh[keep, :])
        abss.append((vh.conj().T * s) @ vh)
    return Op(vs), Op(abss)


def support(alg, a, eps_rel=DEFAULT_EPS_REL):
    """Spectral projection of ``|a|`` onto eigenvalues above ``eps_rel * ||a||_inf``."""
    if not 0 < eps_rel < 1:
        raise DomainError(f"eps_rel must lie in (0, 1), got {eps_rel}")
    alg.check(a)
    svds = [np.linalg.svd(b) for b in a.blocks]
    cut, top = _cutoff([s for _, s, _ in svds], eps_rel)
    blocks = []
    for _, s, vh in svds:
        keep = s > cut if top > 0 else np.zeros_like(s, dtype=bool)
        blocks.append(vh[keep, :].conj().T @ vh[keep, :])
    return Op(blocks)


def _hermitian_eigh(alg, x):
    alg.check(x)
    scale = max(1.0, x.max_abs())
    out = []
    for b in x.blocks:
        if np.max(np.abs(b - b.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
            raise DomainError("operator is not Hermitian within tolerance")
        out.append(np.linalg.eigh((b + b.conj().T) / 2))
    return out


def power_on_support(alg, x, r, eps_rel=DEFAULT_EPS_REL):
    """Spectral power ``lambda -> lambda**r`` on the support of a PSD operator.

    Eigenvalues at or below ``eps_rel * ||x||_inf`` are mapped to 0, so
    ``r = 0`` gives the support projection and negative ``r`` gives the
    inverse inside the corner ``q M q``.
    """
    eigs = _hermitian_eigh(alg, x)
    cut, top = _cutoff([lam for lam, _ in eigs], eps_rel)
    floor = min((float(lam.min()) if lam.size else 0.0) for lam, _ in eigs)
    if floor < -HERMITIAN_TOL * max(1.0, top):
        raise DomainError(f"operator is not positive semidefinite (eigenvalue {floor:.3e})")
    blocks = []
    for lam, vec in eigs:
        keep = lam > cut if top > 0 else np.zeros_like(lam, dtype=bool)
        f = np.zeros_like(lam)
        f[keep] = lam[keep] ** r
        blocks.append((vec * f) @ vec.conj().T)
    return Op(blocks)


def column_square_function(E):
    """``X = (sum_i x_i* x_i)^(1/2)`` for the basis of ``E``."""
    alg = E.algebra
    sq = alg.zeros()
    for x in E.basis:
        sq = sq + x.H @ x
    return power_on_support(alg, sq, 0.5)


@dataclass(frozen=True)
class Subspace:
    """An n-dimensional subspace of ``L_p(M)`` given by an ordered basis.

    Linear independence is checked on the coordinate Gram matrix
    ``[tau(x_i* x_j)]``: its smallest eigenvalue must be at least
    ``rank_tol`` times its largest.
    """

    algebra: TracialAlgebra
    basis: tuple
    rank_tol: float = field(default=1e-12, compare=False)

    def __post_init__(self):
        basis = tuple(self.basis)
        if not basis:
            raise ShapeError("a subspace needs a nonempty basis")
        for x in basis:
            self.algebra.check(x)
        object.__setattr__(self, "basis", basis)
        lam = np.linalg.eigvalsh(self.gram())
        if lam[-1] <= 0 or lam[0] < self.rank_tol * lam[-1]:
            raise DomainError("basis is not linearly independent within rank_tol")

    @classmethod
    def from_vecs(cls, algebra, vecs, **kwargs):
        return cls(algebra, tuple(algebra.unvec(v) for v in np.atleast_2d(vecs)), **kwargs)

    @property
    def n(self):
        return len(self.basis)

    def coords(self):
        """``(n, dim)`` matrix whose rows are the vectorized basis elements."""
        return np.array([self.algebra.vec(x) for x in self.basis])

    def gram(self):
        V = self.coords()
        w = self.algebra.weight_vector()
        return (V.conj() * w) @ V.T

    def combine(self, coef):
        """Basis ``y_j = sum_i x_i coef[i, j]``."""
        coef = np.asarray(coef, dtype=np.complex128)
        return [self.algebra.unvec(v) for v in coef.T @ self.coords()]
