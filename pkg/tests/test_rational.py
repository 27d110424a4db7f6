from __future__ import annotations

import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SIG1, fixture_spec, rand_tensor
from dmpva.ncalg import NCPoly
from dmpva.rational import (
    RationalFn,
    RationalPseudoOp,
    WindowError,
    bilateral_generator_bracket,
    build_nib,
    check_functional_equations,
    check_truncated_bracket,
    iota_expand,
    mixed_identity_residual,
    nib_functions,
    parse_rational,
    quadratic_identity_residual,
    rat_adjoint,
    rat_compose,
    rat_compose_chains,
    rational_generator_bracket,
    symbol_product,
    symbols_equal,
    valuation,
)
from dmpva.tensor import Tensor, bullet, shift_tensor, sigma

Z = RationalFn.monomial(1, 1)
ONE = RationalFn.const(1)
u = NCPoly.gen(SIG1, 0)
one = NCPoly.const(SIG1)

small = st.integers(-3, 3)
rationals = st.builds(
    lambda n, d: RationalFn(n, d) if any(d) else RationalFn(n),
    st.lists(small, min_size=1, max_size=3),
    st.lists(small, min_size=1, max_size=3),
)


# -- rational functions -------------------------------------------------------

def test_normal_form():
    r = RationalFn([2, 2], [4, 4])
    assert r == RationalFn.const(Fraction(1, 2))
    assert (Z * Z - 1) / (Z - 1) == Z + 1
    assert RationalFn([0, 1], [0, 2]) == RationalFn.const(Fraction(1, 2))
    with pytest.raises(ZeroDivisionError):
        RationalFn([1], [0])


@given(rationals, rationals, rationals)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a - a).is_zero()
    if not b.is_zero():
        assert (a / b) * b == a


@given(rationals)
def test_invert_variable_is_involution(r):
    assert r.invert_variable().invert_variable() == r


def test_iota_of_geometric_series():
    r = 1 / (1 - Z)
    plus = iota_expand(r, 1, (-8, 8))
    assert plus.coeffs == {(n,): 1 for n in range(0, 9)}
    minus = iota_expand(r, -1, (-8, 8))
    assert minus.coeffs == {(n,): -1 for n in range(-8, 0)}
    assert valuation(r, 1) == 0 and valuation(r, -1) == -1


def test_iota_lowers_window_to_valuation():
    s = iota_expand(RationalFn.monomial(3, -5), 1, (0, 4))
    assert s.lo == (-5,) and s.coeffs == {(-5,): 3}


@pytest.mark.parametrize("direction", [1, -1])
def test_iota_is_multiplicative(direction):
    rng = random.Random(direction)
    for _ in range(15):
        a = RationalFn([rng.randint(-2, 2) for _ in range(3)], [1, rng.randint(-2, 2)])
        b = RationalFn([rng.randint(-2, 2) for _ in range(2)], [rng.choice([1, -1]), rng.randint(-2, 2), 1])
        prod = iota_expand(a * b, direction, (-6, 6))
        s = _tight(a, direction) * _tight(b, direction)
        for n in range(-6, 7):
            assert prod.coeff((n,)) == s.coeff((n,))


def _tight(r, direction, reach=14):
    v = valuation(r, direction)
    return iota_expand(r, direction, (v, v + reach) if direction == 1 else (v - reach, v))


def test_product_window_is_sound():
    rng = random.Random(14)
    for _ in range(15):
        a = RationalFn([rng.randint(-2, 2) for _ in range(3)], [1, rng.randint(-2, 2)])
        b = RationalFn([1, rng.randint(-2, 2)], [rng.choice([1, -1]), rng.randint(-2, 2), 1])
        s = iota_expand(a, 1, (-3, 5)) * iota_expand(b, 1, (-3, 5))
        exact = iota_expand(a * b, 1, (-20, 20))
        for n in range(-20, s.hi[0] + 1):
            assert s.coeff((n,)) == exact.coeff((n,))


def test_unknown_coefficients_raise():
    s = iota_expand(1 / (1 - Z), 1, (0, 3))
    with pytest.raises(WindowError):
        s.coeff((4,))
    assert s.coeff((-40,)) == 0


def test_parse_rational():
    assert parse_rational("(1+z)/(1-z)") == (1 + Z) / (1 - Z)
    assert parse_rational("3*z^-2 + 1/2") == RationalFn.monomial(3, -2) + Fraction(1, 2)
    assert parse_rational("-(z)^2") == -(Z * Z)
    for bad in ("", "(1+z", "1/(z-z)", "y+1", "z^x", "1 2"):
        with pytest.raises((ValueError, ZeroDivisionError)):
            parse_rational(bad)


# -- functional equations ---------------------------------------------------

@pytest.mark.parametrize("alpha,beta,k,p,gamma", [
    (-1, Fraction(1, 2), 1, 2, Fraction(1, 4)),
    (0, 1, 2, 0, 1),
    (-2, 1, 1, 1, 1),
    (-1, Fraction(1, 2), 2, -3, Fraction(1, 4)),
])
def test_functional_equations_hold(alpha, beta, k, p, gamma):
    rep = check_functional_equations(*nib_functions(alpha, beta, k, p), (-6, 6))
    assert rep.ok and rep.gamma == gamma


def test_functional_equations_detect_perturbation():
    a, b, _ = nib_functions(-1, Fraction(1, 2), 1, 2)
    bp = b + Fraction(1, 100) * Z
    assert not check_functional_equations(a, bp, bp, (-6, 6)).ok


def test_zero_functions():
    zero = RationalFn.const(0)
    rep = check_functional_equations(zero, zero, zero)
    assert rep.ok and rep.gamma == 0


def test_identity_residuals():
    assert quadratic_identity_residual(3 * (1 + Z * Z) / (1 - Z * Z), 9) == {}
    assert quadratic_identity_residual((1 + Z) / (1 - Z), 1) == {}
    assert quadratic_identity_residual((1 + Z) / (1 - Z), 2) != {}
    a, b, _ = nib_functions(-2, 1, 1, 1)
    assert mixed_identity_residual(b, a) == {}


# -- rational pseudodifference operators ---------------------------------------

def _ops(rng):
    f, g = rand_tensor(rng, SIG1, 2, 2, 2), rand_tensor(rng, SIG1, 2, 2, 2)
    A = RationalPseudoOp(SIG1, [(1, (f, 1 / (1 - Z), g))])
    B = RationalPseudoOp(SIG1, [(2, (g, (1 + Z) / (1 - Z ** 3), f)), (1, (f,))])
    return f, g, A, B


def test_symbol_of_single_chain():
    f, g = Tensor.pure(u, one + u), Tensor.pure(u * u, u)
    s = RationalPseudoOp(SIG1, [(1, (f, 1 / (1 - Z), g))]).symbol(5)
    for n in range(6):
        assert s.coeffs[(n,)] == bullet(f, shift_tensor(g, n))


def test_composition_matches_symbol_product():
    rng = random.Random(12)
    for _ in range(4):
        _, _, A, B = _ops(rng)
        C = rat_compose(A, B, 6)
        D = symbol_product(A.symbol(12), B.symbol(12))
        assert C.restrict((C.lo[0],), (6,)) == D.restrict((C.lo[0],), (6,))


def test_adjoint_reverses_products_and_is_involutive():
    rng = random.Random(13)
    for _ in range(4):
        _, _, A, B = _ops(rng)
        lhs = rat_adjoint(rat_compose_chains(A, B))
        rhs = rat_compose_chains(rat_adjoint(B), rat_adjoint(A))
        assert symbols_equal(lhs, rhs, 6)
        assert symbols_equal(rat_adjoint(rat_adjoint(A)), A, 8)


def test_adjoint_of_local_chain_is_sigma():
    f = Tensor.pure(u, u * u)
    A = RationalPseudoOp(SIG1, [(3, (f,))])
    assert symbols_equal(rat_adjoint(A), RationalPseudoOp(SIG1, [(3, (sigma(f),))]), 4)


def test_nib_is_skew():
    for args in [(-1, Fraction(1, 2), 1, 3), (0, 1, 2, 0), (2, -1, 1, 0)]:
        H = build_nib(*args)
        assert symbols_equal(rat_adjoint(H), -H, 8)


def test_nib_matches_handwritten_chains():
    assert symbols_equal(fixture_spec("nib_m1_half_k1_p2.json").pairs[(0, 0)], build_nib(-1, Fraction(1, 2), 1, 2), 8)
    assert symbols_equal(fixture_spec("nib_0_1_k2_p0.json").pairs[(0, 0)], build_nib(0, 1, 2, 0), 8)


def test_nib_guards():
    with pytest.warns(UserWarning):
        build_nib(1, 1, 1, 0)
    with pytest.raises(ValueError):
        build_nib(0, 1, 0, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_nib(-2, 1, 1, 0)


def test_chain_shape_is_checked():
    with pytest.raises(ValueError):
        RationalPseudoOp(SIG1, [(1, (Tensor.unit(SIG1), ONE))])
    with pytest.raises(TypeError):
        RationalPseudoOp(SIG1, [(1, (ONE,))])


# -- brackets on a window -------------------------------------------------------

def test_constant_rational_bracket():
    rep = check_truncated_bracket(fixture_spec("rational_constant.json"), (-4, 4))
    assert rep.rational_skew and not rep.nonlocal_skew and rep.jacobi and rep.ok


def test_quadratic_rational_bracket():
    rep = check_truncated_bracket(fixture_spec("rational_quadratic.json"), (-3, 3))
    assert rep.rational_skew and rep.jacobi


@pytest.mark.parametrize("alpha,beta,jacobi", [(-1, Fraction(1, 2), True), (0, 1, True), (-2, 1, True), (1, 1, False)])
def test_nib_jacobi(alpha, beta, jacobi):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        H = build_nib(alpha, beta, 1, 2)
    rep = check_truncated_bracket(rational_generator_bracket(SIG1, {(0, 0): H}), (-3, 3))
    assert rep.rational_skew and rep.jacobi is jacobi


def test_non_skew_rational_chain():
    g = Tensor.pure(u, u)
    r = (1 + Z * Z) / (1 - Z)
    rep = check_truncated_bracket(rational_generator_bracket(SIG1, {(0, 0): RationalPseudoOp(SIG1, [(1, (g, r, g))])}), (-3, 3))
    assert not rep.rational_skew and not rep.ok


def _sign(n: int) -> Fraction:
    return Fraction((n > 0) - (n < 0))


def test_bilateral_sign_bracket():
    co = lambda n: Tensor.pure(u * u.shift(n), u.shift(n) * u).scale(_sign(n))  # noqa: E731
    rep = check_truncated_bracket(bilateral_generator_bracket(SIG1, {(0, 0): co}), (-3, 3))
    assert rep.rational_skew is None and rep.nonlocal_skew and rep.jacobi and rep.ok


def test_bilateral_one_sided_is_not_skew():
    co = lambda n: Tensor.pure(u * u.shift(n), u.shift(n) * u).scale(1 if n >= 0 else 0)  # noqa: E731
    rep = check_truncated_bracket(bilateral_generator_bracket(SIG1, {(0, 0): co}), (-3, 3))
    assert not rep.nonlocal_skew and not rep.ok


def test_empty_window_rejected():
    with pytest.raises(ValueError):
        check_truncated_bracket(fixture_spec("rational_constant.json"), (2, 1))
