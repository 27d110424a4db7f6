from __future__ import annotations

import itertools
import random

from hypothesis import given, settings

from conftest import SIG1, SIG2, fixture_spec, polys, rand_poly, rand_spec
from dmpva.bracket import BracketSpec, lattice_to_lambda, residue_to_lattice, one_term_family
from dmpva.ncalg import NCPoly, shift
from dmpva.rep import (
    CommPoly,
    check_commutative_mpva,
    comm_triple,
    induce_bracket,
    rep_jacobi_rhs,
    rep_matrix,
    trace_functional,
)


def g(i, n, a, b):
    return (i, n, a, b)


def mono(*gens):
    acc: dict = {}
    for x in gens:
        acc[x] = acc.get(x, 0) + 1
    return tuple(sorted(acc.items()))


def test_rep_of_unit_is_identity():
    X = rep_matrix(NCPoly.const(SIG2), 2)
    for a in range(2):
        for b in range(2):
            assert X[a][b] == CommPoly.const(SIG2, 2, int(a == b))


def test_rep_of_product_is_matrix_product():
    X = rep_matrix(NCPoly.parse(SIG2, "u*v"), 2)
    for i in range(2):
        for j in range(2):
            expect = sum((CommPoly.gen(SIG2, 2, 0, 0, i, k) * CommPoly.gen(SIG2, 2, 1, 0, k, j) for k in range(2)), CommPoly.const(SIG2, 2, 0))
            assert X[i][j] == expect


@given(polys(SIG2), polys(SIG2))
@settings(max_examples=30)
def test_rep_is_multiplicative(f, h):
    N = 2
    X, Y, Z = rep_matrix(f, N), rep_matrix(h, N), rep_matrix(f * h, N)
    for i in range(N):
        for j in range(N):
            acc = CommPoly.const(SIG2, N, 0)
            for k in range(N):
                acc = acc + X[i][k] * Y[k][j]
            assert Z[i][j] == acc


@given(polys(SIG2))
@settings(max_examples=30)
def test_rep_commutes_with_shift(f):
    X, Y = rep_matrix(f, 2), rep_matrix(shift(f, 1), 2)
    assert all(Y[a][b] == X[a][b].shift(1) for a in range(2) for b in range(2))


def test_free_commutator_induced_bracket():
    cs = induce_bracket(fixture_spec("free_commutator.json"), 2)
    for (i, j, k, l) in itertools.product(range(2), repeat=4):
        for m, n in [(0, 0), (1, 3), (2, -1)]:
            got = cs.gen_bracket(g(0, m, i, j), g(0, n, k, l))
            expect: dict = {}
            if i == l:
                expect[(n - m, mono(g(0, n, k, j)))] = expect.get((n - m, mono(g(0, n, k, j))), 0) + 1
            if k == j:
                key = (n - m, mono(g(0, n, i, l)))
                expect[key] = expect.get(key, 0) - 1
            assert got == {k2: v for k2, v in expect.items() if v}


def test_square_volterra_rep():
    cs = induce_bracket(fixture_spec("volterra_square.json"), 1)
    u, u1, um = g(0, 0, 0, 0), g(0, 1, 0, 0), g(0, -1, 0, 0)
    expect = {(1, ((u, 2), (u1, 2))): 1, (-1, ((um, 2), (u, 2))): -1}
    assert cs.gen_bracket(u, u) == expect


def test_zero_spec_induces_zero():
    cs = induce_bracket(BracketSpec.zero(SIG2), 2)
    assert cs.pairs == {}
    assert check_commutative_mpva(cs).ok


def test_induced_quadratic_case_passes():
    assert check_commutative_mpva(induce_bracket(one_term_family(SIG2, "ii", 1, 2), 2)).ok


def test_induced_not_jacobi_fails_at_n2():
    report = check_commutative_mpva(induce_bracket(fixture_spec("not_jacobi_a1_b2_r0.json"), 2))
    assert not report.ok and report.jacobi_failures and not report.skew_failures


def test_trace():
    assert trace_functional(NCPoly.const(SIG2), 3) == CommPoly.const(SIG2, 3, 3)
    uv, vu = NCPoly.parse(SIG2, "u*v"), NCPoly.parse(SIG2, "v*u")
    assert trace_functional(uv, 2) == trace_functional(vu, 2)
    rng = random.Random(1)
    for _ in range(10):
        f = rand_poly(rng, SIG2)
        assert trace_functional(shift(f, 1), 2) == trace_functional(f, 2)


def test_residue_then_represent_commutes():
    rng = random.Random(2)
    for _ in range(5):
        spec = rand_spec(rng, SIG1)
        round_trip = lattice_to_lambda(residue_to_lattice(spec))
        assert induce_bracket(round_trip, 2).pairs == induce_bracket(spec, 2).pairs


def test_relative_jacobi_identity_small():
    spec = fixture_spec("not_jacobi_a2_b1_r3.json")
    N = 2
    cs = induce_bracket(spec, N)
    a, b, c = (NCPoly.parse(SIG2, s) for s in ("u*v", "v[1]", "u"))
    A, B, C = rep_matrix(a, N), rep_matrix(b, N), rep_matrix(c, N)
    for i, j, k, l, u, v in [(0, 1, 1, 0, 0, 0), (1, 1, 0, 1, 1, 0), (0, 0, 0, 0, 1, 1)]:
        lhs = comm_triple(cs, A[i][j].terms, B[k][l].terms, C[u][v].terms)
        assert lhs == rep_jacobi_rhs(spec, a, b, c, N, i, j, k, l, u, v)
