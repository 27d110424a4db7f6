from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given

from conftest import SIG1, SIG2, polys
from dmpva.ncalg import NCPoly, ParseError, Signature, partial, shift, support
from dmpva.tensor import Tensor, partial_at

P = lambda s, sig=SIG2: NCPoly.parse(sig, s)  # noqa: E731


def test_concatenation_product():
    assert (P("u") * P("u[1]")).terms == {((0, 0), (0, 1)): 1}


def test_noncommutative_expansion():
    assert (P("u - u[1]") * P("u + u[1]")) == P("u^2 + u*u[1] - u[1]*u - u[1]^2")


@given(polys(SIG2))
def test_unit_law(p):
    one = NCPoly.const(SIG2)
    assert one * p == p and p * one == p


@given(polys(SIG2), polys(SIG2), polys(SIG2))
def test_product_associative(p, q, r):
    assert (p * q) * r == p * (q * r)


def test_shift_of_word():
    assert shift(P("u*u[1]"), 1) == P("u[1]*u[2]")


@given(polys(SIG2))
def test_shift_inverse(p):
    assert shift(shift(p, 3), -3) == p


@given(polys(SIG2), polys(SIG2))
def test_shift_is_homomorphism(p, q):
    assert shift(p * q, 1) == shift(p, 1) * shift(q, 1)


def test_finite_order_shift_wraps():
    sig = Signature(("u",), 4)
    assert shift(NCPoly.gen(sig, 0, 3), 1) == NCPoly.gen(sig, 0, 0)
    assert NCPoly.gen(sig, 0, -1) == NCPoly.gen(sig, 0, 3)


def test_partial_splits_each_letter():
    one = NCPoly.const(SIG1)
    expect = Tensor.pure(one, P("u[1]*u", SIG1)) + Tensor.pure(P("u*u[1]", SIG1), one)
    assert partial(P("u*u[1]*u", SIG1), 0, 0) == expect


def test_partial_of_constant_vanishes():
    assert partial(NCPoly.const(SIG2, 5), 0, 0).is_zero()


@given(polys(SIG2), __import__("hypothesis").strategies.integers(-2, 2))
def test_shift_commutes_with_partial(p, n):
    from dmpva.tensor import shift_tensor

    assert shift_tensor(partial(p, 0, n), 1) == partial(shift(p, 1), 0, n + 1)


def test_support():
    assert support(P("u*v[3]")) == {(0, 0), (1, 3)}
    assert support(NCPoly.const(SIG2)) == set()


@given(polys(SIG2), polys(SIG2))
def test_support_subadditive(p, q):
    assert support(p + q) <= support(p) | support(q)


@given(polys(SIG2))
def test_support_is_exactly_nonzero_partials(p):
    for i, n in support(p):
        assert not partial(p, i, n).is_zero()
    for n in range(-4, 5):
        for i in range(2):
            if (i, n) not in support(p):
                assert partial(p, i, n).is_zero()


@given(polys(SIG2, max_len=4))
def test_partials_strongly_commute(f):
    # (d/du_{i,m})_L df/du_{j,n} = (d/du_{j,n})_R df/du_{i,m}
    for i, m in [(0, 0), (1, 1), (0, -1)]:
        for j, n in [(0, 0), (1, 0), (0, 2)]:
            left = partial_at(partial(f, j, n), 1, i, m)
            right = partial_at(partial(f, i, m), 2, j, n)
            assert left == right


def test_parser_grammar():
    assert P("1/3*u^3") == (P("u") ** 3).scale(Fraction(1, 3))
    assert P(" u[-2] * v ") == NCPoly.gen(SIG2, 0, -2) * NCPoly.gen(SIG2, 1)
    assert P("-(u - v)") == P("v - u")


@pytest.mark.parametrize("text", ["u v", "w", "u[", "u^-1", "u*", ""])
def test_parser_rejects(text):
    with pytest.raises(ParseError):
        P(text)


def test_signature_validation():
    with pytest.raises(ValueError):
        Signature(("u", "u"))
    with pytest.raises(ValueError):
        Signature(())


def test_mixed_signatures_rejected():
    with pytest.raises(ValueError):
        P("u") * NCPoly.gen(SIG1, 0)


def test_canonical_order_is_deterministic():
    assert str(P("v + u*u + u")) == str(P("u + u*u + v"))
