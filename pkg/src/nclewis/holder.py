"""
Equality in the tracial Hölder inequality
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
``||ab||_1 <= ||a||_p ||b||_{p'}`` holds for all ``a, b``. At equality the
pair is spectrally aligned, and the alignment takes one of three forms:

* ``1 < p < inf``: ``(bb*)^{p'/2} = C (a*a)^{p/2}`` for a constant ``C > 0``;
* ``p = 1``: ``q bb* q = ||b||_inf^2 q`` with ``q`` the right support of ``a``;
* ``p = inf``: ``Q a*a Q = ||a||_inf^2 Q`` with ``Q`` the left support of ``b``.

:func:`holder_check` measures the gap and, inside the equality band,
reports the residual of the applicable identity. :func:`equality_pair`
builds pairs that attain equality, for testing.
"""
from dataclasses import dataclass

import numpy as np

from .algebra import DEFAULT_EPS_REL, _check_p, power_on_support, schatten_norm, support, trace
from .opspace import conjugate_exponent

__all__ = ["HolderReport", "holder_check", "equality_pair"]


@dataclass(frozen=True)
class HolderReport:
    """Outcome of :func:`holder_check`.

    ``constant`` is the fitted ``C`` (interior case only); ``residual`` is
    the relative residual of the case identity, ``nan`` when equality was
    not detected or the pair is trivial.
    """

    p: float
    p_conj: float
    lhs: float
    rhs: float
    gap: float
    equality: bool
    case: str
    constant: float = None
    residual: float = float("nan")
    trivial: bool = False


def _case_name(p):
    if p == 1:
        return "p_one"
    if np.isinf(p):
        return "p_infinity"
    return "interior"


def _rel_sup(alg, x, scale):
    return x.max_abs() / scale if scale > 0 else x.max_abs()


def holder_check(alg, a, b, p, eq_tol=1e-9, eps_rel=DEFAULT_EPS_REL):
    """Hölder gap of ``(a, b)`` and, at equality, the structural residual.

    Parameters
    ----------
    alg : TracialAlgebra
    a, b : Op
    p : float
        ``1 <= p <= inf``; ``b`` is measured in the conjugate exponent.
    eq_tol : float
        Equality is declared when ``|lhs - rhs| <= eq_tol * rhs``.

    Returns
    -------
    HolderReport
    """
    p = _check_p(p)
    q = conjugate_exponent(p)
    alg.check(a)
    alg.check(b)
    lhs = schatten_norm(alg, a @ b, 1)
    rhs = schatten_norm(alg, a, p) * schatten_norm(alg, b, q)
    case = _case_name(p)
    if a.max_abs() == 0 or b.max_abs() == 0:
        return HolderReport(p, q, lhs, rhs, rhs - lhs, True, case, trivial=True)
    equality = abs(lhs - rhs) <= eq_tol * rhs
    report = dict(p=p, p_conj=q, lhs=lhs, rhs=rhs, gap=rhs - lhs, equality=equality, case=case)
    if not equality:
        return HolderReport(**report)

    if case == "interior":
        M1 = power_on_support(alg, b @ b.H, q / 2, eps_rel)
        M2 = power_on_support(alg, a.H @ a, p / 2, eps_rel)
        C = trace(alg, M1 @ M2).real / trace(alg, M2 @ M2).real
        res = _rel_sup(alg, M1 - C * M2, M1.max_abs())
        return HolderReport(**report, constant=float(C), residual=float(res))
    if case == "p_one":
        proj = support(alg, a, eps_rel)
        nb = schatten_norm(alg, b, np.inf)
        res = _rel_sup(alg, proj @ b @ b.H @ proj - nb ** 2 * proj, nb ** 2)
        return HolderReport(**report, residual=float(res))
    proj = support(alg, b.H, eps_rel)
    na = schatten_norm(alg, a, np.inf)
    res = _rel_sup(alg, proj @ a.H @ a @ proj - na ** 2 * proj, na ** 2)
    return HolderReport(**report, residual=float(res))


def _corner_contraction(alg, rng, proj):
    """Random ``(1 - proj) K (1 - proj)`` with ``||K||_inf <= 1``."""
    comp = alg.identity() - proj
    K = comp @ alg.random_op(rng) @ comp
    nk = schatten_norm(alg, K, np.inf)
    return K / nk * rng.uniform(0.2, 1.0) if nk > 0 else K


def _rank_deficient(alg, rng):
    blocks = []
    for m in alg.block_dims:
        r = max(1, m - 1) if m > 1 else 1
        g = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
        h = rng.standard_normal((r, m)) + 1j * rng.standard_normal((r, m))
        blocks.append(g @ h)
    return alg.op(blocks)


def equality_pair(alg, p, rng, scale=None):
    """A random pair ``(a, b)`` attaining equality in Hölder's inequality.

    * interior ``p``: ``b = s |a|^{p-1} w`` for a unitary ``w``;
    * ``p = 1``: ``b = s (q + (1-q) K (1-q)) w`` with ``q = supp|a|`` and ``||K|| <= 1``;
    * ``p = inf``: ``a = s w (Q + (1-Q) K (1-Q))`` with ``Q`` the left support of ``b``.

    ``a`` is rank deficient in the endpoint cases so the corner term is not void.
    """
    p = _check_p(p)
    s = rng.uniform(0.5, 2.0) if scale is None else float(scale)
    w = alg.random_unitary(rng)
    if p == 1:
        a = _rank_deficient(alg, rng)
        q = support(alg, a)
        return a, s * (q + _corner_contraction(alg, rng, q)) @ w
    if np.isinf(p):
        b = _rank_deficient(alg, rng)
        Q = support(alg, b.H)
        return s * w @ (Q + _corner_contraction(alg, rng, Q)), b
    a = alg.random_op(rng)
    absa = power_on_support(alg, a.H @ a, (p - 1) / 2)
    return a, s * absa @ w
