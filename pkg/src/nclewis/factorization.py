"""
Change-of-density factorizations and distance certificates
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
With a Lewis basis ``(x_i)`` of ``E`` and density ``D = X^{p-2}_q``, the
weight ``phi = tau(. D)`` makes ``(x_i)`` orthonormal, and

    A : L_p(M) -> C_p^n,  y -> (tau(D x_i* y))_i
    B : C_p^n -> E,       c -> sum_i c_i x_i

satisfy ``BA|_E = I_E``. For ``p >= 2`` the leg ``B`` is completely bounded
by ``2^{1/2-1/p}`` and ``||A|| <= n^{1/2-1/p}``; for ``p < 2`` the roles
swap. Maps are stored as matrices acting on row-major vectorizations
(:meth:`TracialAlgebra.vec`) and on coordinate vectors.

Norm values in certificates are *measured*: lower estimates obtained by
sampled-and-ascended coefficient families (see :func:`cb_norm_profile`),
checked against the proven bounds. Hard entries carry explicit constants;
soft entries compare against growth rates whose constants are unknown.
"""
from dataclasses import dataclass, field

import numpy as np

from .algebra import Subspace, TracialAlgebra
from .exceptions import ConvergenceError, DomainError
from .lewis import lewis_basis
from .opspace import (
    ColumnSpace,
    IntersectionSpace,
    LpSpace,
    Pullback,
    RowSpace,
    SumSpace,
    amplified_norm,
    cb_norm_profile,
    column_norm,
    conjugate_exponent,
)

__all__ = [
    "LinearMapMatrix",
    "CertificateEntry",
    "Certificate",
    "MeasureOptions",
    "factorize_subspace",
    "build_projection",
    "factorize_quotient",
    "rc_distance_certificate",
    "sharpness_probe",
    "doubled_subspace",
    "row_subspace",
]

REL_TOL = 1e-6


@dataclass(frozen=True)
class LinearMapMatrix:
    """Matrix of a linear map between coordinatized spaces.

    ``domain`` and ``codomain`` are descriptive labels such as ``"L_3(M)"``
    or ``"C_3^2"``; ``matrix`` has shape ``(dim codomain, dim domain)``.
    """

    matrix: np.ndarray
    domain: str
    codomain: str

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        if m.ndim != 2:
            raise DomainError(f"map matrix must be 2-D, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self):
        return self.matrix.shape

    def __call__(self, v):
        return self.matrix @ np.asarray(v, dtype=np.complex128)

    def __matmul__(self, other):
        if not isinstance(other, LinearMapMatrix):
            return NotImplemented
        if self.shape[1] != other.shape[0]:
            raise DomainError(f"cannot compose {self.shape} after {other.shape}")
        return LinearMapMatrix(self.matrix @ other.matrix, other.domain, self.codomain)


@dataclass(frozen=True)
class CertificateEntry:
    """One measured quantity at one amplification level.

    ``hard`` entries are proven bounds with explicit constants and count
    toward pass/fail; soft entries compare against a rate only.
    """

    quantity: str
    level: int
    measured: float
    bound: float
    hard: bool = True
    rel_tol: float = REL_TOL

    @property
    def margin(self):
        return self.bound * (1 + self.rel_tol) - self.measured

    @property
    def ok(self):
        return (not self.hard) or self.margin >= 0

    def to_dict(self):
        return {"quantity": self.quantity, "level": self.level, "measured": self.measured,
                "bound": self.bound, "margin": self.margin, "hard": self.hard}


@dataclass(frozen=True)
class Certificate:
    """Measured norms with their bounds, plus exact residuals of the construction."""

    kind: str
    entries: tuple
    metadata: dict
    residuals: dict
    value: float = float("nan")
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def passed(self):
        return all(e.ok for e in self.entries)

    def quantities(self):
        return list(dict.fromkeys(e.quantity for e in self.entries))

    def levels(self, quantity):
        return sorted((e for e in self.entries if e.quantity == quantity), key=lambda e: e.level)

    def measured(self, quantity):
        return np.array([e.measured for e in self.levels(quantity)])

    def worst(self, quantity):
        """Entry with the smallest margin for ``quantity``."""
        return min(self.levels(quantity), key=lambda e: e.margin)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value, "metadata": dict(self.metadata),
                "residuals": dict(self.residuals), "entries": [e.to_dict() for e in self.entries]}


@dataclass(frozen=True)
class MeasureOptions:
    """Effort knobs for norm measurements.

    Attributes
    ----------
    k_max : int
        Highest amplification level.
    trials : int
        Random families scored per level (also the number of families in
        the tensor chain checks).
    restarts : int
        Best-scoring families refined by ascent.
    """

    k_max: int = 4
    trials: int = 200
    restarts: int = 16
    seed: int = 0
    maxiter: int = 400

    def __post_init__(self):
        if self.k_max < 1 or self.trials < 1 or self.restarts < 0:
            raise DomainError("k_max and trials must be >= 1, restarts >= 0")

    def streams(self, count):
        return np.random.SeedSequence(self.seed).spawn(count)


def _check_open_p(p):
    p = float(p)
    if not 1 < p < np.inf:
        raise DomainError(f"factorizations need 1 < p < inf, got {p}")
    return p


def _two_factor(p):
    return 2.0 ** abs(0.5 - 1.0 / p)


def _rate(n, p):
    return float(n) ** abs(0.5 - 1.0 / p)


def _lewis(E, p, lewis_opts):
    res = lewis_basis(E, p, **(lewis_opts or {}))
    if not res.converged:
        raise ConvergenceError(
            f"Lewis iteration did not converge (gram residual {res.gram_residual:.3e})", best=res)
    return res


def _profile(T, src, dst, opts, stream, k_max=None):
    return cb_norm_profile(T, src, dst, k_max=k_max or opts.k_max, trials=opts.trials,
                           restarts=opts.restarts, seed=stream, maxiter=opts.maxiter)


def _entries(name, profile, bound, hard):
    return [CertificateEntry(name, e.level, e.value, bound, hard) for e in profile]


def _chain_ratio(alg, ops, p, n, opts, stream):
    """Largest ``||sum alpha_i (x) o_i||_p / column_norm(alpha, p)`` over random families, per level."""
    rng = np.random.default_rng(stream)
    out = []
    for k in range(1, opts.k_max + 1):
        worst = 0.0
        for _ in range(opts.trials):
            alpha = rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k))
            worst = max(worst, amplified_norm(alg, alpha, ops, p) / column_norm(alpha, p))
        out.append(worst)
    return out


def _metadata(E, p, opts, **more):
    meta = {"p": p, "n": E.n, "block_dims": list(E.algebra.block_dims),
            "trace_weights": list(E.algebra.trace_weights), "seed": opts.seed, "k_max": opts.k_max}
    meta.update(more)
    return meta


def _analysis_synthesis(lew):
    alg = lew.algebra
    w = alg.weight_vector()
    S = np.array([alg.vec(x) for x in lew.basis]).T
    A = np.array([w * np.conj(alg.vec(x @ lew.density)) for x in lew.basis])
    return A, S


def _factor_maps(E, p, lewis_opts):
    lew = _lewis(E, p, lewis_opts)
    Amat, Bmat = _analysis_synthesis(lew)
    lp, cp = f"L_{p:g}(M)", f"C_{p:g}^{E.n}"
    V = E.coords().T
    ba = np.linalg.norm(Bmat @ (Amat @ V) - V) / max(np.linalg.norm(V), 1e-300)
    residuals = {"ba_identity": float(ba), "gram": lew.gram_residual,
                 "normalization": lew.normalization_residual}
    return lew, LinearMapMatrix(Amat, lp, cp), LinearMapMatrix(Bmat, cp, "E"), residuals


def factorize_subspace(E, p, lewis_opts=None, measure=None):
    """Factor the identity of ``E`` through ``C_p^n`` by change of density.

    Parameters
    ----------
    E : Subspace
    p : float
        ``1 < p < inf``.
    lewis_opts : dict, optional
        Keyword arguments for :func:`lewis_basis`.
    measure : MeasureOptions, optional

    Returns
    -------
    A : LinearMapMatrix
        ``L_p(M) -> C_p^n``.
    B : LinearMapMatrix
        ``C_p^n -> E`` (into ``L_p(M)`` coordinates).
    cert : Certificate
        For ``p >= 2``: ``||A||`` at level 1 against ``n^{1/2-1/p}`` and the
        amplified norms of ``B`` against ``2^{1/2-1/p}``. For ``p < 2``:
        ``||B||`` at level 1 against ``n^{1/p-1/2}`` and the amplified norms
        of ``A`` against ``2^{1/p-1/2}``. In both cases the tensor chain
        behind the amplified bound is checked on random families.

    Raises
    ------
    ConvergenceError
        If the Lewis iteration does not converge.
    """
    p = _check_open_p(p)
    opts = measure or MeasureOptions()
    lew, A, B, residuals = _factor_maps(E, p, lewis_opts)
    alg, n = E.algebra, E.n
    Amat, Bmat = A.matrix, B.matrix
    s = opts.streams(3)
    two, rate = _two_factor(p), _rate(n, p)
    Lp, Cn = LpSpace(alg, p), ColumnSpace(n, p)
    entries = []
    if p >= 2:
        entries += _entries("A_norm", _profile(Amat, Lp, Cn, opts, s[0], k_max=1), rate, True)
        entries += _entries("B_cb", _profile(Bmat, Cn, Lp, opts, s[1]), two, True)
        chain = _chain_ratio(alg, lew.basis, p, n, opts, s[2])
    else:
        entries += _entries("B_norm", _profile(Bmat, Cn, Lp, opts, s[0], k_max=1), rate, True)
        entries += _entries("A_cb", _profile(Amat, Lp, Cn, opts, s[1]), two, True)
        q = conjugate_exponent(p)
        chain = _chain_ratio(alg, [x @ lew.density for x in lew.basis], q, n, opts, s[2])
    entries += [CertificateEntry("tensor_chain", k, v, two, True) for k, v in enumerate(chain, 1)]
    cert = Certificate("factorization", tuple(entries), _metadata(E, p, opts), residuals,
                       extras={"lewis": lew})
    return A, B, cert


def build_projection(E, p, lewis_opts=None, measure=None):
    """Projection ``P = BA`` of ``L_p(M)`` onto ``E``.

    Returns
    -------
    P : LinearMapMatrix
        ``L_p(M) -> L_p(M)``.
    cert : Certificate
        Amplified norms of ``P`` against ``2^{|1/2-1/p|} n^{|1/2-1/p|}``,
        the idempotency residual ``||P^2 - P||`` (spectral norm of the
        matrix) and the fixed-point residual on ``E``.
    """
    p = _check_open_p(p)
    opts = measure or MeasureOptions()
    lew, A, B, fact_res = _factor_maps(E, p, lewis_opts)
    Pm = B.matrix @ A.matrix
    lp = f"L_{p:g}(M)"
    P = LinearMapMatrix(Pm, lp, lp)
    V = E.coords().T
    residuals = {
        "idempotency": float(np.linalg.norm(Pm @ Pm - Pm, 2)),
        "fixes_E": float(np.max(np.linalg.norm(Pm @ V - V, axis=0) / np.linalg.norm(V, axis=0))),
        "rank": int(np.linalg.matrix_rank(Pm, tol=1e-8 * max(np.linalg.norm(Pm, 2), 1e-300))),
        "ba_identity": fact_res["ba_identity"],
    }
    bound = _two_factor(p) * _rate(E.n, p)
    Lp = LpSpace(E.algebra, p)
    prof = _profile(Pm, Lp, Lp, opts, opts.streams(1)[0])
    cert = Certificate("projection", tuple(_entries("P_cb", prof, bound, True)),
                       _metadata(E, p, opts), residuals, value=prof[-1].value,
                       extras={"lewis": lew})
    return P, cert


def factorize_quotient(Estar, p, lewis_opts=None, measure=None):
    """Factorization for the quotient ``E = L_p(M) / (Estar)^perp``.

    ``Estar`` is an n-dimensional subspace of ``L_{p'}(M)``, identified with
    the dual of ``E``. With a Lewis basis ``(z_i)`` of ``Estar`` (exponent
    ``p'``) and its density ``D'``, ``E`` is coordinatized by the quotient
    map ``Q y = (tau(z_i* y))_i`` and

        A = I : E -> C_p^n,     B : C_p^n -> L_p(M),  c -> sum c_i z_i D'

    satisfy ``QBA = I_E``. ``||A: E -> C_p^n||`` is evaluated through its
    adjoint ``c -> sum c_i z_i`` from ``C_{p'}^n`` into ``L_{p'}(M)``.

    Returns
    -------
    A, B : LinearMapMatrix
    cert : Certificate
        ``p >= 2``: ``||A||`` (level 1) against ``n^{1/2-1/p}``, amplified
        ``B`` against ``2^{1/2-1/p}``. ``p < 2``: ``||B||`` (level 1) against
        ``n^{1/p-1/2}``, amplified ``A`` against ``2^{1/p-1/2}``. Residuals:
        ``QBA - I`` and the adjoint pairing defect of ``B``.
    """
    p = _check_open_p(p)
    q = conjugate_exponent(p)
    opts = measure or MeasureOptions()
    lew = _lewis(Estar, q, lewis_opts)
    alg, n = Estar.algebra, Estar.n
    w = alg.weight_vector()
    Z = np.array([alg.vec(z) for z in lew.basis]).T
    Bm = np.array([alg.vec(z @ lew.density) for z in lew.basis]).T
    Qm = (np.conj(Z) * w[:, None]).T
    Am = np.eye(n, dtype=np.complex128)
    A = LinearMapMatrix(Am, "E", f"C_{p:g}^{n}")
    B = LinearMapMatrix(Bm, f"C_{p:g}^{n}", f"L_{p:g}(M)")

    rng = np.random.default_rng(opts.streams(4)[3])
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    u = rng.standard_normal(alg.dim) + 1j * rng.standard_normal(alg.dim)
    Bstar = (np.conj(Bm) * w[:, None]).T
    lhs = np.vdot(u * w, Bm @ c)
    rhs = np.vdot(Bstar @ u, c)
    residuals = {"qba_identity": float(np.linalg.norm(Qm @ Bm @ Am - np.eye(n))),
                 "adjoint": float(abs(lhs - rhs) / max(abs(lhs), 1e-300)),
                 "gram": lew.gram_residual, "normalization": lew.normalization_residual}

    s = opts.streams(3)
    two, rate = _two_factor(p), _rate(n, p)
    entries = []
    adj_src, adj_dst = ColumnSpace(n, q), LpSpace(alg, q)
    if p >= 2:
        entries += _entries("A_norm", _profile(Z, adj_src, adj_dst, opts, s[0], k_max=1), rate, True)
        entries += _entries("B_cb", _profile(Bm, ColumnSpace(n, p), LpSpace(alg, p), opts, s[1]), two, True)
    else:
        entries += _entries("B_norm", _profile(Bm, ColumnSpace(n, p), LpSpace(alg, p), opts, s[0], k_max=1),
                            rate, True)
        entries += _entries("A_cb", _profile(Z, adj_src, adj_dst, opts, s[1]), two, True)
    cert = Certificate("quotient", tuple(entries), _metadata(Estar, p, opts), residuals,
                       extras={"lewis": lew, "Q": LinearMapMatrix(Qm, f"L_{p:g}(M)", "E")})
    return A, B, cert


def doubled_subspace(E):
    """``E cap_p E^op`` inside ``L_p(M (+) M^op)``: spanned by ``(x_i, x_i^T)``."""
    alg = E.algebra
    dbl = alg.doubled()
    basis = [dbl.op(list(x.blocks) + [b.T for b in x.blocks]) for x in E.basis]
    return Subspace(dbl, basis)


def rc_distance_certificate(E, p, lewis_opts=None, measure=None):
    """Distance certificate between ``E`` and the ``RC_{p'}`` proxy.

    Lewis vectors ``(f_j)`` of ``F = E cap_p E^op`` (in the doubled
    algebra) are pulled back to vectors ``(e_j)`` of ``E``. The proxy is
    ``R_p^n + C_p^n`` for ``p >= 2`` and ``R_p^n cap C_p^n`` for ``p < 2``,
    and the certificate measures, level by level,

    * ``B_leg``: ``c -> sum c_j e_j`` from the proxy into ``L_p(M)``;
    * ``A_leg``: its inverse from ``E`` onto the proxy;
    * ``A_leg_F``: the inverse from ``F`` onto the proxy.

    The explicit-constant leg is hard-checked against
    ``2 * 2^{|1/2-1/p|}``: ``B_leg`` for ``p >= 2``, ``A_leg_F`` for ``p < 2``.
    The other legs are reported against the rate ``n^{|1/2-1/p|}``. The
    certificate value is ``B_leg * A_leg`` at the top level; its ratio to
    the rate is the implied constant.
    """
    p = _check_open_p(p)
    opts = measure or MeasureOptions()
    F = doubled_subspace(E)
    lew = _lewis(F, p, lewis_opts)
    alg, n = E.algebra, E.n
    C = lew.coef
    S_E = E.coords().T @ C
    S_F = F.coords().T @ C
    proxy = SumSpace(n, p) if p >= 2 else IntersectionSpace(n, p)
    Lp = LpSpace(alg, p)
    s = opts.streams(3)
    b_leg = _profile(S_E, proxy, Lp, opts, s[0])
    a_leg = _profile(None, Pullback(Lp, S_E), proxy, opts, s[1])
    a_leg_f = _profile(None, Pullback(LpSpace(F.algebra, p), S_F), proxy, opts, s[2])
    two, rate = 2 * _two_factor(p), _rate(n, p)
    entries = (_entries("B_leg", b_leg, two if p >= 2 else rate, p >= 2)
               + _entries("A_leg", a_leg, rate, False)
               + _entries("A_leg_F", a_leg_f, two if p < 2 else rate, p < 2))
    products = [b.value * a.value for b, a in zip(b_leg, a_leg)]
    entries += [CertificateEntry("distance", k, v, rate, False) for k, v in enumerate(products, 1)]
    value = max(products)
    residuals = {"gram": lew.gram_residual, "normalization": lew.normalization_residual}
    meta = _metadata(E, p, opts, proxy="R+C" if p >= 2 else "R cap C", rate=rate,
                     implied_constant=value / rate)
    return Certificate("rc_distance", tuple(entries), meta, residuals, value=value,
                       extras={"lewis": lew, "F": F})


def row_subspace(n):
    """``R_p^n`` inside ``S_p^n``: the span of ``e_{1i}``."""
    alg = TracialAlgebra((n,))
    basis = []
    for i in range(n):
        b = np.zeros((n, n))
        b[0, i] = 1.0
        basis.append(alg.op([b]))
    return Subspace(alg, basis)


def sharpness_probe(n_list, p, lewis_opts=None, measure=None):
    """Upper certificates and lower witnesses for ``E = R_p^n`` in ``S_p^n``.

    For each ``n``: the :func:`rc_distance_certificate` value (measured up
    to level ``max(k_max, n)``, where the row structure saturates), and a lower
    estimate of the amplified norm, at level ``k = n``, of the identity
    from the proxy ``R_p^n + C_p^n`` onto ``R_p^n``. Both are reported with
    their ratios to ``n^{1/2-1/p}``.

    Returns
    -------
    list of dict
        Keys ``n, rate, upper, lower, upper_ratio, lower_ratio``.
    """
    p = float(p)
    if not 2 < p < np.inf:
        raise DomainError(f"sharpness probe needs 2 < p < inf, got {p}")
    opts = measure or MeasureOptions()
    rows = []
    for n in n_list:
        n = int(n)
        level = MeasureOptions(max(opts.k_max, n), opts.trials, opts.restarts, opts.seed, opts.maxiter)
        cert = rc_distance_certificate(row_subspace(n), p, lewis_opts, level)
        seq = np.random.SeedSequence([opts.seed, n])
        lower = cb_norm_profile(None, SumSpace(n, p), RowSpace(n, p), k_max=max(n, 1), trials=opts.trials,
                                restarts=opts.restarts, seed=seq, maxiter=opts.maxiter)[-1].value
        rate = _rate(n, p)
        rows.append({"n": n, "rate": rate, "upper": cert.value, "lower": lower,
                     "upper_ratio": cert.value / rate, "lower_ratio": lower / rate})
    return rows
