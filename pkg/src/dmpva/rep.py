"""Representation algebras V_N and the induced multiplicative lambda-brackets.

A generator of V_N is ``(i, n, a, b)``: the (a, b) matrix entry of u_{i,n},
with 0-based a, b. Commutative monomials are sorted tuples of
``(generator, exponent)`` pairs.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from .bracket import BracketSpec, triple_bracket
from .diffop import Laurent
from .ncalg import NCPoly, Signature, Word, add_into

CGen = tuple[int, int, int, int]
Mono = tuple[tuple[CGen, int], ...]

ONE: Mono = ()


def mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for g, e in m2:
        acc[g] = acc.get(g, 0) + e
    return tuple(sorted(acc.items()))


def mono_shift(m: Mono, k: int, order: int | None) -> Mono:
    if k == 0:
        return m
    if order:
        return tuple(sorted((((i, (n + k) % order, a, b), e) for (i, n, a, b), e in m)))
    return tuple(((i, n + k, a, b), e) for (i, n, a, b), e in m)


def cmul(p: dict, q: dict) -> dict:
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            add_into(out, mono_mul(m1, m2), c1 * c2)
    return out


def cshift(p: dict, k: int, order: int | None) -> dict:
    if k == 0:
        return p
    return {mono_shift(m, k, order): c for m, c in p.items()}


def cpartials(p: dict) -> dict[CGen, dict]:
    out: dict[CGen, dict] = {}
    for m, c in p.items():
        for idx, (g, e) in enumerate(m):
            rest = m[:idx] + (((g, e - 1),) if e > 1 else ()) + m[idx + 1:]
            add_into(out.setdefault(g, {}), rest, c * e)
    return {g: t for g, t in out.items() if t}


class CommPoly:
    """Element of the commutative algebra V_N."""

    __slots__ = ("sig", "N", "terms")

    def __init__(self, sig: Signature, N: int, terms: Mapping[Mono, object] | None = None):
        self.sig = sig
        self.N = N
        self.terms: dict[Mono, Fraction] = {}
        for m, c in (terms or {}).items():
            add_into(self.terms, tuple(sorted(m)), Fraction(c))

    @classmethod
    def _raw(cls, sig: Signature, N: int, terms: dict) -> "CommPoly":
        p = cls.__new__(cls)
        p.sig, p.N, p.terms = sig, N, terms
        return p

    @classmethod
    def gen(cls, sig: Signature, N: int, i: int, n: int, a: int, b: int) -> "CommPoly":
        return cls._raw(sig, N, {(((i, sig.red(n), a, b), 1),): Fraction(1)})

    @classmethod
    def const(cls, sig: Signature, N: int, c=1) -> "CommPoly":
        return cls(sig, N, {ONE: c})

    def __add__(self, other: "CommPoly") -> "CommPoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            add_into(out, m, c)
        return CommPoly._raw(self.sig, self.N, out)

    def __neg__(self) -> "CommPoly":
        return CommPoly._raw(self.sig, self.N, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "CommPoly") -> "CommPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CommPoly._raw(self.sig, self.N, {m: c * other for m, c in self.terms.items()} if other else {})
        return CommPoly._raw(self.sig, self.N, cmul(self.terms, other.terms))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "CommPoly":
        out = CommPoly.const(self.sig, self.N)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, k: int) -> "CommPoly":
        return CommPoly._raw(self.sig, self.N, cshift(self.terms, k, self.sig.order))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CommPoly.const(self.sig, self.N, other)
        if not isinstance(other, CommPoly):
            return NotImplemented
        return self.N == other.N and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        return format_comm(self.sig, self.terms)

    def __repr__(self) -> str:
        return f"CommPoly({self})"


def format_cgen(sig: Signature, g: CGen, N: int) -> str:
    i, n, a, b = g
    base = sig.names[i]
    sub = "" if N == 1 else f"_{a + 1}{b + 1}"
    return f"{base}{sub}" if n == 0 else f"{base}{sub}[{n}]"


def format_comm(sig: Signature, terms: dict, N: int = 2) -> str:
    from .ncalg import format_coeff

    if not terms:
        return "0"
    parts = []
    for m in sorted(terms, key=lambda m: (sum(e for _, e in m), m)):
        c = terms[m]
        body = "*".join(format_cgen(sig, g, N) + (f"^{e}" if e > 1 else "") for g, e in m)
        mag = abs(c)
        s = format_coeff(mag) if not body else (body if mag == 1 else f"{format_coeff(mag)}*{body}")
        parts.append(s if not parts and c > 0 else (f"-{s}" if not parts else ("+ " if c > 0 else "- ") + s))
    return " ".join(parts)


# -- matrices of a noncommutative element ---------------------------------


def _word_matrix(sig: Signature, N: int, w: Word) -> list[list[dict]]:
    M = [[({ONE: Fraction(1)} if a == b else {}) for b in range(N)] for a in range(N)]
    for i, n in w:
        nxt = [[{} for _ in range(N)] for _ in range(N)]
        for a in range(N):
            for k in range(N):
                if not M[a][k]:
                    continue
                for b in range(N):
                    g = ((((i, n, k, b), 1),))
                    for m, c in M[a][k].items():
                        add_into(nxt[a][b], mono_mul(m, g), c)
        M = nxt
    return M


def rep_matrix(f: NCPoly, N: int) -> list[list[CommPoly]]:
    if N < 1:
        raise ValueError("N must be positive")
    acc = [[{} for _ in range(N)] for _ in range(N)]
    for w, c in f.terms.items():
        M = _word_matrix(f.sig, N, w)
        for a in range(N):
            for b in range(N):
                for m, d in M[a][b].items():
                    add_into(acc[a][b], m, c * d)
    return [[CommPoly._raw(f.sig, N, acc[a][b]) for b in range(N)] for a in range(N)]


def rep_word_entry(sig: Signature, N: int, w: Word, a: int, b: int) -> dict:
    return _word_matrix(sig, N, w)[a][b]


def trace_functional(f: NCPoly, N: int) -> CommPoly:
    """tr X(f), with each monomial shifted so that its least index is 0."""
    X = rep_matrix(f, N)
    out: dict = {}
    order = f.sig.order
    for a in range(N):
        for m, c in X[a][a].terms.items():
            if m and not order:
                low = min(g[1] for g, _ in m)
                m = mono_shift(m, -low, order)
            elif m and order:
                m = min(mono_shift(m, -g[1], order) for g, _ in m)
            add_into(out, m, c)
    return CommPoly._raw(f.sig, N, out)


# -- commutative brackets ---------------------------------------------------


class CommBracketSpec:
    """Multiplicative lambda-bracket on V_N fixed by its generator values.

    ``pairs[(g1, g2)]`` is {g1 _lambda g2} for shift-0 generators as a map
    ``{exp: {mono: coeff}}``.
    """

    def __init__(self, sig: Signature, N: int, pairs: Mapping[tuple[CGen, CGen], Mapping[int, Mapping[Mono, object]]]):
        self.sig = sig
        self.N = N
        self.pairs: dict = {}
        for key, lp in pairs.items():
            clean: dict = {}
            for e, poly in lp.items():
                t = {m: Fraction(c) for m, c in poly.items() if c}
                if t:
                    clean[sig.red(e)] = t
            if clean:
                self.pairs[key] = clean
        self._memo: dict = {}

    def gens(self) -> list[CGen]:
        return [(i, 0, a, b) for i in range(self.sig.nvars) for a in range(self.N) for b in range(self.N)]

    def gen_bracket(self, y: CGen, z: CGen) -> dict:
        """{y _lambda z} for generators at any shift, via sesquilinearity."""
        key = (y, z)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        order = self.sig.order
        m, n = y[1], z[1]
        base = self.pairs.get(((y[0], 0, y[2], y[3]), (z[0], 0, z[2], z[3])), {})
        out: dict = {}
        for k, poly in base.items():
            e = n - m + k
            if order:
                e %= order
            for mono, c in cshift(poly, n, order).items():
                add_into(out, (e, mono), c)
        self._memo[key] = out
        return out

    def bracket(self, f: dict, g: dict) -> dict:
        """{f _lambda g} as ``{(exp, mono): coeff}``."""
        order = self.sig.order
        pf = cpartials(f)
        pg = cpartials(g)
        out: dict = {}
        for z, dg in pg.items():
            for y, df in pf.items():
                for (e, mono), c in self.gen_bracket(y, z).items():
                    left = cmul({mono: c}, dg)
                    for m, d in cmul(left, cshift(df, e, order)).items():
                        add_into(out, (e, m), d)
        return out

    def eval(self, f: CommPoly, g: CommPoly) -> dict:
        return self.bracket(f.terms, g.terms)


def induce_bracket(spec: BracketSpec, N: int) -> CommBracketSpec:
    """{a_ij _l b_kl} = sum_n (a_n b)'_kj (a_n b)''_il l^n on generators."""
    sig = spec.sig
    pairs: dict = {}
    for (i, j), p in spec.pairs.items():
        by_exp: dict = {}
        for (e, (w1, w2)), c in p.terms.items():
            by_exp.setdefault(e[0], []).append((w1, w2, c))
        for a, b, k, l in product(range(N), repeat=4):
            lp: dict = {}
            for e, items in by_exp.items():
                acc: dict = {}
                for w1, w2, c in items:
                    x1 = rep_word_entry(sig, N, w1, k, b)
                    x2 = rep_word_entry(sig, N, w2, a, l)
                    for m, d in cmul(x1, x2).items():
                        add_into(acc, m, c * d)
                if acc:
                    lp[e] = acc
            if lp:
                pairs[((i, 0, a, b), (j, 0, k, l))] = lp
    return CommBracketSpec(sig, N, pairs)


def _gen_poly(g: CGen) -> dict:
    return {((g, 1),): Fraction(1)}


def comm_triple(cs: CommBracketSpec, a: dict, b: dict, c: dict) -> dict:
    """{a _l {b _m c}} - {b _m {a _l c}} - {{a _l b}_{l m} c} as ``{((p, q), mono): coeff}``."""
    order = cs.sig.order

    def red(e):
        return (e[0] % order, e[1] % order) if order else e

    out: dict = {}
    inner = cs.bracket(b, c)
    by_q: dict = {}
    for (q, m), v in inner.items():
        by_q.setdefault(q, {})[m] = v
    for q, poly in by_q.items():
        for (p, m), v in cs.bracket(a, poly).items():
            add_into(out, (red((p, q)), m), v)
    inner = cs.bracket(a, c)
    by_p: dict = {}
    for (p, m), v in inner.items():
        by_p.setdefault(p, {})[m] = v
    for p, poly in by_p.items():
        for (q, m), v in cs.bracket(b, poly).items():
            add_into(out, (red((p, q)), m), -v)
    ab = cs.bracket(a, b)
    by_p = {}
    for (p, m), v in ab.items():
        by_p.setdefault(p, {})[m] = v
    for p, poly in by_p.items():
        for (k, m), v in cs.bracket(poly, c).items():
            add_into(out, (red((p + k, k)), m), -v)
    return out


@dataclass
class CommReport:
    ok: bool
    skew_failures: list = field(default_factory=list)
    jacobi_failures: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def comm_skew_defect(cs: CommBracketSpec, y: CGen, z: CGen) -> dict:
    """{y _l z} + |_{x=S} {z _{l^-1 x^-1} y}."""
    order = cs.sig.order
    out = dict(cs.gen_bracket(y, z))
    for (e, m), c in cs.gen_bracket(z, y).items():
        ne = -e % order if order else -e
        add_into(out, (ne, mono_shift(m, -e, order)), c)
    return out


def check_commutative_mpva(cs: CommBracketSpec, threads: int = 1) -> CommReport:
    gens = cs.gens()
    skew = []
    for y, z in product(gens, repeat=2):
        d = comm_skew_defect(cs, y, z)
        if d:
            skew.append(((y, z), d))
    triples = list(product(gens, repeat=3))

    def one(t):
        return comm_triple(cs, *(_gen_poly(g) for g in t))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            defects = list(pool.map(one, triples))
    else:
        defects = [one(t) for t in triples]
    jac = [(t, d) for t, d in zip(triples, defects) if d]
    return CommReport(not skew and not jac, skew, jac)


# -- transporting noncommutative triple brackets ---------------------------


def rep_triple_entry(T: Laurent, N: int, idx: tuple[tuple[int, int], tuple[int, int], tuple[int, int]], swap: bool = False) -> dict:
    """A_{ij,kl,mn} = a'_ij a''_kl a'''_mn applied to a (lambda, mu) Laurent tensor.

    ``swap`` exchanges the two formal variables, turning a bracket written
    in (mu, lambda) order into (lambda, mu) order.
    """
    sig = T.sig
    out: dict = {}
    (i1, j1), (i2, j2), (i3, j3) = idx
    for (e, (w1, w2, w3)), c in T.terms.items():
        e2 = (e[1], e[0]) if swap else e
        x = cmul(cmul(rep_word_entry(sig, N, w1, i1, j1), rep_word_entry(sig, N, w2, i2, j2)), rep_word_entry(sig, N, w3, i3, j3))
        for m, d in x.items():
            add_into(out, (e2, m), c * d)
    return out


def rep_jacobi_rhs(spec: BracketSpec, a: NCPoly, b: NCPoly, c: NCPoly, N: int, i, j, k, l, u, v) -> dict:
    """{{a_l b_m c}}_{uj,il,kv} - {{b_m a_l c}}_{ul,kj,iv}."""
    T1 = triple_bracket(spec, a, b, c)
    T2 = triple_bracket(spec, b, a, c)
    out = rep_triple_entry(T1, N, ((u, j), (i, l), (k, v)))
    for key, val in rep_triple_entry(T2, N, ((u, l), (k, j), (i, v)), swap=True).items():
        add_into(out, key, -val)
    return out


def entry(f: NCPoly, N: int, a: int, b: int) -> dict:
    return rep_matrix(f, N)[a][b].terms
