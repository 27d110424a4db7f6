from __future__ import annotations

import pytest
from hypothesis import given

from conftest import SIG1, SIG2, fixture_spec, laurents, polys
from dmpva.bracket import eval_bracket
from dmpva.diffop import (
    DiffOp,
    Laurent,
    adjoint,
    apply_to_vector,
    compose,
    compose_scalar,
    is_skew_adjoint,
    subst_shift,
    symbol_compose,
)
from dmpva.ncalg import NCPoly
from dmpva.tensor import Mode, Tensor

u = lambda n=0: NCPoly.gen(SIG2, 0, n)  # noqa: E731
v = lambda n=0: NCPoly.gen(SIG2, 1, n)  # noqa: E731
ONE = NCPoly.const(SIG2)


def op(t: Tensor, n: int) -> DiffOp:
    return DiffOp(SIG2, 1, {(0, 0): Laurent.monomial(t, (n,))})


def test_compose_example():
    A = op(Tensor.pure(u(), ONE), 1)
    B = op(Tensor.pure(v(), ONE), 1)
    assert compose(A, B) == op(Tensor.pure(u() * v(1), ONE), 2)


@given(laurents(SIG2))
def test_identity_is_unit(a):
    A = DiffOp(SIG2, 1, {(0, 0): a})
    Id = DiffOp.identity(SIG2, 1)
    assert compose(Id, A) == A and compose(A, Id) == A


@given(laurents(SIG2), laurents(SIG2))
def test_symbol_rule(a, b):
    # two independent routes: operator composition and the symbol product A(zS).B(z)
    assert compose_scalar(a, b) == symbol_compose(a, b)


@given(laurents(SIG2), laurents(SIG2), laurents(SIG2))
def test_compose_associative(a, b, c):
    assert compose_scalar(compose_scalar(a, b), c) == compose_scalar(a, compose_scalar(b, c))


def test_adjoint_example():
    assert adjoint(op(Tensor.pure(u(), ONE), 1)) == op(Tensor.pure(ONE, u(-1)), -1)


@given(laurents(SIG2))
def test_adjoint_involution(a):
    A = DiffOp(SIG2, 1, {(0, 0): a})
    assert adjoint(adjoint(A)) == A


@given(laurents(SIG2), laurents(SIG2))
def test_adjoint_reverses_composition(a, b):
    A, B = DiffOp(SIG2, 1, {(0, 0): a}), DiffOp(SIG2, 1, {(0, 0): b})
    assert adjoint(compose(A, B)) == compose(adjoint(B), adjoint(A))


def test_matrix_adjoint_transposes():
    a = Laurent.monomial(Tensor.pure(u(), v()), (2,))
    A = DiffOp(SIG2, 2, {(0, 1): a})
    assert set(adjoint(A).entries) == {(1, 0)}


def test_apply_to_vector():
    assert apply_to_vector(op(Tensor.unit(SIG2), 1), [u()]) == [u(1)]
    w = NCPoly.parse(SIG2, "u[2]*v")
    assert apply_to_vector(op(Tensor.pure(u(), v()), 0), [w]) == [u() * w * v()]
    with pytest.raises(ValueError):
        apply_to_vector(op(Tensor.unit(SIG2), 1), [u(), v()])


@given(laurents(SIG2), polys(SIG2), polys(SIG2))
def test_apply_is_linear(a, f, g):
    H = DiffOp(SIG2, 1, {(0, 0): a})
    assert apply_to_vector(H, [f + g]) == [x + y for x, y in zip(apply_to_vector(H, [f]), apply_to_vector(H, [g]))]


def test_subst_shift_example():
    P = Laurent(SIG2, 2, 2, {((1, 2), ((( 0, 0),), ())): 1})
    out = subst_shift(P, v(), Mode.MUL_LEFT, slot=1)
    assert out == Laurent.monomial(Tensor.pure(u(), v(2)), (3,))


def test_subst_shift_with_unit_is_plain_substitution():
    P = Laurent(SIG2, 2, 2, {((1, 2), (((0, 0),), ())): 1, ((0, -1), ((), ())): 3})
    out = subst_shift(P, ONE, Mode.MUL_LEFT, slot=1)
    expect = Laurent.monomial(Tensor.pure(u(), ONE), (3,)) + Laurent.monomial(Tensor.unit(SIG2).scale(3), (-1,))
    assert out == expect


def test_right_leibniz_reconstruction():
    spec = fixture_spec("free_commutator.json")
    uu = NCPoly.gen(SIG1, 0)
    one = NCPoly.const(SIG1)
    expect = Laurent.monomial(Tensor.pure(uu * uu, one) - Tensor.pure(one, uu * uu), (0,))
    assert eval_bracket(spec, "u^2", "u") == expect


def test_skew_adjoint_decision():
    a = Laurent.monomial(Tensor.unit(SIG2), (1,))
    H = DiffOp(SIG2, 1, {(0, 0): a})
    assert is_skew_adjoint(H) == (False, (0, 0))
    assert is_skew_adjoint(DiffOp(SIG2, 1, {(0, 0): a - adjoint(H).entry(0, 0)}))[0]


def test_finite_order_reduces_exponents():
    from dmpva.ncalg import Signature

    sig = Signature(("u",), 3)
    L = Laurent.monomial(Tensor.unit(sig), (4,))
    assert L.exponents() == [(1,)]


def test_size_mismatch():
    with pytest.raises(ValueError):
        compose(DiffOp.identity(SIG2, 1), DiffOp.identity(SIG2, 2))
