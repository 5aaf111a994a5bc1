import numpy as np
import pytest

from nclewis import DomainError, TracialAlgebra, equality_pair, holder_check, power_on_support

from conftest import elementary


def test_polar_aligned_example():
    alg = TracialAlgebra((2,))
    a = alg.op([np.diag([1.0, 2.0])])
    b = alg.op([np.diag([1.0, 4.0])])
    rep = holder_check(alg, a, b, 3)
    assert rep.lhs == pytest.approx(9) and rep.rhs == pytest.approx(9)
    assert rep.equality and rep.case == "interior"
    assert rep.constant == pytest.approx(1, abs=1e-10)
    assert rep.residual < 1e-10


def test_p_one_unitary_example(rng):
    alg = TracialAlgebra((2,))
    a = alg.op([elementary(2, 0, 0)])
    rep = holder_check(alg, a, alg.random_unitary(rng), 1)
    assert rep.equality and rep.case == "p_one" and rep.residual < 1e-10


def test_misaligned_pair_is_strict(rng):
    alg = TracialAlgebra((3,))
    rep = holder_check(alg, alg.random_op(rng), alg.random_op(rng), 2)
    assert rep.gap > 0 and not rep.equality
    assert np.isnan(rep.residual)


def test_trivial_pair_flagged():
    alg = TracialAlgebra((2,))
    rep = holder_check(alg, alg.zeros(), alg.identity(), 3)
    assert rep.trivial and rep.equality and rep.constant is None


def test_bad_exponent():
    alg = TracialAlgebra((2,))
    with pytest.raises(DomainError):
        holder_check(alg, alg.identity(), alg.identity(), 0.5)


def test_p_infinity_case_uses_left_support_of_b():
    # equality pair where the literal Q a a* Q identity would fail
    alg = TracialAlgebra((2,))
    a, b = alg.op([elementary(2, 0, 1)]), alg.op([elementary(2, 1, 1)])
    rep = holder_check(alg, a, b, np.inf)
    assert rep.equality and rep.residual < 1e-12
    Q = alg.op([elementary(2, 1, 1)])
    assert (Q @ a @ a.H @ Q).max_abs() == 0


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, 4, np.inf])
def test_equality_families(rng, p):
    alg = TracialAlgebra((3, 2), (1.0, 0.7))
    for _ in range(10):
        a, b = equality_pair(alg, p, rng)
        rep = holder_check(alg, a, b, p)
        assert rep.equality and rep.residual < 1e-8
        if rep.case == "interior":
            assert rep.constant > 0


@pytest.mark.parametrize("p", [1.5, 3])
def test_constant_homogeneity(rng, p):
    alg = TracialAlgebra((3,))
    a, b = equality_pair(alg, p, rng, scale=1.0)
    q = p / (p - 1)
    c1 = holder_check(alg, a, b, p).constant
    for s in (0.5, 2.0, 3.7):
        assert holder_check(alg, a, s * b, p).constant == pytest.approx(s ** q * c1, rel=1e-9)


def test_left_unitary_family_is_not_equality(rng):
    alg = TracialAlgebra((3,))
    p = 3
    strict = 0
    for _ in range(10):
        a = alg.random_op(rng)
        b = alg.random_unitary(rng) @ power_on_support(alg, a.H @ a, (p - 1) / 2)
        strict += not holder_check(alg, a, b, p).equality
    assert strict == 10


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, np.inf])
def test_random_pairs_strict(rng, p):
    alg = TracialAlgebra((2, 2))
    for _ in range(10):
        rep = holder_check(alg, alg.random_op(rng), alg.random_op(rng), p)
        assert not rep.equality and rep.gap > 1e-6
