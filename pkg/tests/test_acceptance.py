"""Acceptance criteria, one test each, printing one PASS/FAIL line per criterion.

Tolerances are pinned here; do not loosen them to make a run pass.
"""
import itertools
import json
import time

import numpy as np
import pytest

from nclewis import (
    MeasureOptions,
    Subspace,
    TracialAlgebra,
    build_projection,
    detmax_oracle,
    equality_pair,
    factorize_subspace,
    holder_check,
    lewis_basis,
    opposite_transpose_check,
    power_on_support,
    rc_distance_certificate,
    sharpness_probe,
    support,
    tensor_cauchy_gap,
    verify_conditions,
)
from nclewis.cli import run

from conftest import random_subspace
from oracles import classical_lewis_weights

GRAM_TOL = 1e-8
NORMALIZATION_TOL = 1e-8
ORACLE_TOL = 1e-5
CLASSICAL_TOL = 1e-6
REL_SLACK = 1e-6
IDEMPOTENCY_TOL = 1e-8
DISTANCE_FACTOR = 8.0
SHARPNESS_RANGE = (0.3, 3.0)
HOLDER_RESIDUAL_TOL = 1e-8
HOLDER_STRICT_GAP = 1e-6
OPPOSITE_TOL = 1e-9
Q_INVERSE_TOL = 1e-9
CAUCHY_TOL = -1e-9
TIME_BUDGET_S = 600.0

FULL = MeasureOptions(k_max=4, trials=200, restarts=16, seed=0)


def rate(n, p):
    return n ** abs(0.5 - 1 / p)


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def test_criterion_1_lewis_conditions(capsys):
    shapes = [(4,), (2, 2), (1, 1, 1, 1, 1)]
    grid = list(itertools.product(shapes, (1, 2, 3), (1.25, 1.5, 2, 3, 4)))
    grid += grid[:50 - len(grid)]
    worst_g = worst_n = 0.0
    slow = 0.0
    for seed, (dims, n, p) in enumerate(grid):
        E = random_subspace(np.random.default_rng(1000 + seed), dims, n)
        t = time.perf_counter()
        res = lewis_basis(E, p)
        slow = max(slow, time.perf_counter() - t)
        rep = verify_conditions(res)
        worst_g = max(worst_g, rep.gram_residual)
        worst_n = max(worst_n, rep.normalization_residual)
    ok = len(grid) == 50 and worst_g < GRAM_TOL and worst_n < NORMALIZATION_TOL
    verdict(capsys, 1, ok, f"50 instances, max gram residual {worst_g:.2e}, "
                           f"max |tau(X^p)-n| {worst_n:.2e}, slowest {slow:.2f}s")


def test_criterion_2_oracle_equivalence(capsys):
    shapes = [(2,), (3,), (2, 2), (4,), (1, 1, 1)]
    worst = 0.0
    count = 0
    for i, (dims, p) in enumerate(itertools.product(shapes, (1.5, 3))):
        n = 1 + i % 2
        assert sum(m * m for m in dims) <= 16
        E = random_subspace(np.random.default_rng(2000 + i), dims, n)
        a, b = lewis_basis(E, p), detmax_oracle(E, p, seed=i)
        worst = max(worst, (a.density_power() - b.density_power()).max_abs())
        count += 1
    verdict(capsys, 2, count == 10 and worst < ORACLE_TOL,
            f"{count} instances, max ||X^p_lewis - X^p_oracle||_inf {worst:.2e}")


def test_criterion_3_commutative_bridge(capsys):
    worst = 0.0
    cases = 0
    for seed, (m, n, p) in enumerate(itertools.product((5, 7), (1, 2, 3), (1.25, 1.5, 3, 4))):
        rng = np.random.default_rng(3000 + seed)
        mu = rng.uniform(0.5, 2.0, m)
        alg = TracialAlgebra((1,) * m, tuple(mu))
        R = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        E = Subspace(alg, [alg.op([np.array([[R[t, i]]]) for t in range(m)]) for i in range(n)])
        res = lewis_basis(E, p, tol=1e-12)
        Xp = np.array([b[0, 0].real for b in res.density_power().blocks])
        worst = max(worst, np.max(np.abs(Xp - classical_lewis_weights(R, p, mu))))
        cases += 1
    verdict(capsys, 3, worst < CLASSICAL_TOL, f"{cases} commutative instances, max weight error {worst:.2e}")


FACTOR_CASES = [((4,), 2, 4), ((2, 2), 3, 3), ((3, 1), 2, 1.5), ((1,) * 5, 3, 1.25), ((3,), 2, 6)]


def test_criterion_4_factorization_bounds(capsys):
    worst_norm = worst_chain = worst_cb = np.inf
    for i, (dims, n, p) in enumerate(FACTOR_CASES):
        E = random_subspace(np.random.default_rng(4000 + i), dims, n)
        _, _, cert = factorize_subspace(E, p, measure=FULL)
        norm_q = "A_norm" if p >= 2 else "B_norm"
        cb_q = "B_cb" if p >= 2 else "A_cb"
        bound = rate(n, p)
        worst_norm = min(worst_norm, (bound * (1 + REL_SLACK) - cert.measured(norm_q).max()) / bound)
        two = 2 ** abs(0.5 - 1 / p)
        chain = cert.levels("tensor_chain")
        assert [e.level for e in chain] == [1, 2, 3, 4]
        worst_chain = min(worst_chain, min((two - e.measured) / two for e in chain))
        worst_cb = min(worst_cb, min((two - v) / two for v in cert.measured(cb_q)))
    ok = worst_norm >= 0 and worst_chain >= -REL_SLACK and worst_cb >= -REL_SLACK
    verdict(capsys, 4, ok, f"{len(FACTOR_CASES)} instances; Banach-leg relative slack {worst_norm:.3e}, "
                           f"tensor chain slack {worst_chain:.3e} (200 families, k<=4), "
                           f"amplified leg slack {worst_cb:.3e}")


def test_criterion_5_projection(capsys):
    worst_idem = 0.0
    worst_slack = np.inf
    cases = [((3,), 2, 3), ((2, 2), 2, 1.5), ((4,), 3, 4), ((2, 1), 1, 2.5)]
    for i, (dims, n, p) in enumerate(cases):
        E = random_subspace(np.random.default_rng(5000 + i), dims, n)
        _, cert = build_projection(E, p, measure=FULL)
        bound = 2 ** abs(0.5 - 1 / p) * rate(n, p)
        worst_idem = max(worst_idem, cert.residuals["idempotency"])
        worst_slack = min(worst_slack, min(e.margin / bound for e in cert.levels("P_cb")))
    ok = worst_idem < IDEMPOTENCY_TOL and worst_slack >= 0
    verdict(capsys, 5, ok, f"{len(cases)} instances, max ||P^2-P|| {worst_idem:.2e}, "
                           f"min relative margin of ||P|| levels {worst_slack:.3e}")


def test_criterion_6_distance_rate(capsys):
    worst = 0.0
    consts = []
    for i, (n, p) in enumerate(itertools.product((1, 2, 3, 4), (1.5, 3, 4))):
        dims = (3,) if n <= 2 else (3, 2)
        E = random_subspace(np.random.default_rng(6000 + i), dims, n)
        cert = rc_distance_certificate(E, p, measure=FULL)
        worst = max(worst, cert.value / (DISTANCE_FACTOR * rate(n, p)))
        consts.append(cert.metadata["implied_constant"])
    verdict(capsys, 6, worst <= 1.0, f"12 instances, max value/(8 n^rate) {worst:.3f}, "
                                     f"implied constants in [{min(consts):.3f}, {max(consts):.3f}]")


def test_criterion_7_sharpness(capsys):
    rows = sharpness_probe([1, 2, 3, 4, 5], 4, measure=FULL)
    uppers = [r["upper"] for r in rows]
    monotone = all(b >= a for a, b in zip(uppers, uppers[1:]))
    ratios = [r["lower_ratio"] for r in rows if r["n"] >= 2]
    lo, hi = SHARPNESS_RANGE
    ok = monotone and all(lo <= r <= hi for r in ratios)
    verdict(capsys, 7, ok, f"lower/n^(1/4) for n=2..5: {', '.join(f'{r:.3f}' for r in ratios)}; "
                           f"upper monotone: {monotone}")


def test_criterion_8_holder(capsys):
    rng = np.random.default_rng(8000)
    alg = TracialAlgebra((3, 2), (1.0, 0.6))
    ps = (1, 1.5, 2, 3, np.inf)
    eq_ok, worst_res = 0, 0.0
    for i in range(100):
        p = ps[i % 5]
        a, b = equality_pair(alg, p, rng)
        rep = holder_check(alg, a, b, p)
        eq_ok += rep.equality
        worst_res = max(worst_res, rep.residual if rep.equality else np.inf)
    strict_ok, min_gap = 0, np.inf
    for i in range(100):
        p = ps[i % 5]
        rep = holder_check(alg, alg.random_op(rng), alg.random_op(rng), p)
        strict_ok += not rep.equality
        min_gap = min(min_gap, rep.gap)
    ok = eq_ok == 100 and worst_res < HOLDER_RESIDUAL_TOL and strict_ok == 100 and min_gap > HOLDER_STRICT_GAP
    verdict(capsys, 8, ok, f"equality {eq_ok}/100 (max case residual {worst_res:.2e}), "
                           f"strict {strict_ok}/100 (min gap {min_gap:.2e})")


def test_criterion_9_identities(capsys):
    rng = np.random.default_rng(9000)
    worst_op = 0.0
    for i in range(100):
        dims = ((2,), (3, 1), (2, 2))[i % 3]
        E = random_subspace(rng, dims, 2)
        N = 2 + i % 2
        c = rng.standard_normal((N, N, 2)) + 1j * rng.standard_normal((N, N, 2))
        lhs, rhs = opposite_transpose_check(E, c, (1, 2, 3, 1.5)[i % 4])
        worst_op = max(worst_op, abs(lhs - rhs))
    worst_q = 0.0
    for i in range(50):
        alg = TracialAlgebra((4, 3))
        blocks = []
        for m in alg.block_dims:
            g = rng.standard_normal((m, m - 1)) + 1j * rng.standard_normal((m, m - 1))
            blocks.append(g @ g.conj().T)
        X = alg.op(blocks)
        r = (0.5, 1.0, 2.0, 3.3)[i % 4]
        lhs = power_on_support(alg, X, r) @ power_on_support(alg, X, -r)
        worst_q = max(worst_q, (lhs - support(alg, X)).max_abs())
    worst_c = np.inf
    for i in range(200):
        alg = TracialAlgebra(((3,), (2, 2), (1, 2))[i % 3])
        n, k = 1 + i % 3, 1 + i % 4
        ops = [alg.random_op(rng) for _ in range(n)]
        coeffs = rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k))
        worst_c = min(worst_c, tensor_cauchy_gap(alg, coeffs, ops))
    ok = worst_op < OPPOSITE_TOL and worst_q < Q_INVERSE_TOL and worst_c > CAUCHY_TOL
    verdict(capsys, 9, ok, f"opposite-transpose max |lhs-rhs| {worst_op:.2e}, "
                           f"q-inverse residual {worst_q:.2e}, tensor Cauchy min eigenvalue {worst_c:.2e}")


def _strip(path):
    obj = json.loads(path.read_text())
    obj.pop("timing", None)
    return json.dumps(obj, sort_keys=True)


def test_criterion_10_determinism_and_time(capsys, tmp_path, session_start):
    inst = tmp_path / "inst.json"
    again = tmp_path / "again.json"
    run(["gen", "--blocks", "2,2", "--n", "2", "--seed", "7", "--p", "3", "--out", str(inst)])
    run(["gen", "--blocks", "2,2", "--n", "2", "--seed", "7", "--p", "3", "--out", str(again)])
    same = inst.read_bytes() == again.read_bytes()
    commands = [["lewis"], ["factorize"], ["project"], ["quotient"], ["distance"], ["holder"], ["norms"]]
    effort = ["--amplify", "2", "--trials", "30", "--restarts", "4", "--seed", "5"]
    for cmd in commands:
        outs = []
        for j in range(2):
            out = tmp_path / f"{cmd[0]}{j}.json"
            extra = effort if cmd[0] in ("factorize", "project", "quotient", "distance") else ["--seed", "5"]
            run(cmd + ["--in", str(inst), "--out", str(out)] + extra)
            outs.append(_strip(out))
        same &= outs[0] == outs[1]
    elapsed = time.perf_counter() - session_start
    ok = same and elapsed < TIME_BUDGET_S
    verdict(capsys, 10, ok, f"seeded outputs bit-identical: {same}; session wall clock {elapsed:.1f}s "
                            f"(budget {TIME_BUDGET_S:.0f}s)")
