"""Double multiplicative lambda-brackets on R_l.

A bracket is fixed by its values on generators. ``BracketSpec`` stores
``pairs[(i, j)] = {{u_i _lambda u_j}}`` as a one-variable ``Laurent``; the
operator matrix ``H`` with ``H_ij = {{u_j _lambda u_i}}`` is derived from it.
Arbitrary elements are bracketed with the Master Formula.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping

from .diffop import DiffOp, Laurent, is_skew_adjoint
from .ncalg import EMPTY, NCPoly, Signature, Word, add_into, all_partials, shift_word
from .tensor import Tensor, bullet_terms, shift_terms


class SkewError(ValueError):
    """Raised when a Jacobi check is requested on a non-skewsymmetric bracket."""


class BracketSpec:
    __slots__ = ("sig", "pairs", "_grouped", "_memo")

    def __init__(self, sig: Signature, pairs: Mapping[tuple[int, int], Laurent] | None = None):
        self.sig = sig
        self.pairs: dict[tuple[int, int], Laurent] = {}
        for (i, j), p in (pairs or {}).items():
            if not (0 <= i < sig.nvars and 0 <= j < sig.nvars):
                raise ValueError(f"generator pair {(i, j)} out of range")
            if p.sig != sig or p.arity != 2 or p.nvars != 1:
                raise ValueError("generator brackets must be (V(x)V)[lambda] elements of the same signature")
            if p.terms:
                self.pairs[(i, j)] = p
        self._grouped: dict[tuple[int, int], list[tuple[int, dict]]] = {}
        for key, p in self.pairs.items():
            g: dict[int, dict] = {}
            for (e, k), c in p.terms.items():
                g.setdefault(e[0], {})[k] = c
            self._grouped[key] = sorted(g.items())
        self._memo: dict = {}

    @classmethod
    def from_H(cls, H: DiffOp) -> "BracketSpec":
        return cls(H.sig, {(j, i): a for (i, j), a in H.entries.items()})

    @classmethod
    def zero(cls, sig: Signature) -> "BracketSpec":
        return cls(sig, {})

    @property
    def H(self) -> DiffOp:
        return DiffOp(self.sig, self.sig.nvars, {(j, i): a for (i, j), a in self.pairs.items()})

    def gen(self, i: int, j: int) -> Laurent:
        """{{u_i _lambda u_j}}."""
        return self.pairs.get((i, j), Laurent.zero(self.sig))

    def scale(self, c) -> "BracketSpec":
        return BracketSpec(self.sig, {k: p.scale(c) for k, p in self.pairs.items()})

    def __add__(self, other: "BracketSpec") -> "BracketSpec":
        keys = set(self.pairs) | set(other.pairs)
        return BracketSpec(self.sig, {k: self.gen(*k) + other.gen(*k) for k in keys})

    def __eq__(self, other) -> bool:
        if not isinstance(other, BracketSpec):
            return NotImplemented
        return self.sig == other.sig and self.pairs == other.pairs

    # -- raw kernels ------------------------------------------------------

    def bracket_words(self, w1: Word, w2: Word) -> dict:
        """{{w1 _lambda w2}} for single words as ``{(exp, (left, right)): c}``."""
        key = (w1, w2)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        if w1 and w2:
            order = self.sig.order
            pf = all_partials(NCPoly._raw(self.sig, {w1: 1}))
            pg = all_partials(NCPoly._raw(self.sig, {w2: 1}))
            for (j, n), dg in pg.items():
                for (i, m), df in pf.items():
                    for k, hk in self._grouped.get((i, j), ()):
                        e = n + k - m
                        left = bullet_terms(dg, shift_terms(hk, n, order))
                        right = {(q, p): c for (p, q), c in shift_terms(df, e, order).items()}
                        if order:
                            e %= order
                        for kk, c in bullet_terms(left, right).items():
                            add_into(out, (e, kk), c)
        self._memo[key] = out
        return out

    def bracket_terms(self, f: dict, g: dict) -> dict:
        out: dict = {}
        for w1, c1 in f.items():
            for w2, c2 in g.items():
                for k, c in self.bracket_words(w1, w2).items():
                    add_into(out, k, c1 * c2 * c)
        return out


def _as_poly(sig: Signature, p) -> NCPoly:
    if isinstance(p, NCPoly):
        if p.sig != sig:
            raise ValueError("signature mismatch")
        return p
    if isinstance(p, str):
        return NCPoly.parse(sig, p)
    if isinstance(p, (int, Fraction)):
        return NCPoly.const(sig, p)
    raise TypeError(f"cannot read {p!r} as a polynomial")


def _wrap2(sig: Signature, raw: dict) -> Laurent:
    return Laurent._raw(sig, 2, 1, {((e,), k): c for (e, k), c in raw.items()})


def eval_bracket(spec: BracketSpec, f, g) -> Laurent:
    """{{f _lambda g}} by the Master Formula."""
    f = _as_poly(spec.sig, f)
    g = _as_poly(spec.sig, g)
    return _wrap2(spec.sig, spec.bracket_terms(f.terms, g.terms))


# -- the maps {{a _l B}}_{L,R} and {{A _l b}}_{L,R} -------------------------


def bracket_L(spec: BracketSpec, a: NCPoly, B: Tensor) -> Laurent:
    """{{a _lambda b' (x) b''}}_L = {{a _lambda b'}} (x) b''."""
    out: dict = {}
    for (b1, b2), c in B.terms.items():
        for (e, (x1, x2)), d in spec.bracket_terms(a.terms, {b1: 1}).items():
            add_into(out, ((e,), (x1, x2, b2)), c * d)
    return Laurent._raw(spec.sig, 3, 1, out)


def bracket_R(spec: BracketSpec, a: NCPoly, B: Tensor) -> Laurent:
    """{{a _lambda b' (x) b''}}_R = b' (x) {{a _lambda b''}}."""
    out: dict = {}
    for (b1, b2), c in B.terms.items():
        for (e, (x1, x2)), d in spec.bracket_terms(a.terms, {b2: 1}).items():
            add_into(out, ((e,), (b1, x1, x2)), c * d)
    return Laurent._raw(spec.sig, 3, 1, out)


def bracket_tensor_L(spec: BracketSpec, A: Tensor, b: NCPoly) -> Laurent:
    """{{a' (x) a'' _lambda b}}_L = {{a' _{lambda x} b}} (x)_1 (|_{x=S} a'')."""
    order = spec.sig.order
    out: dict = {}
    for (a1, a2), c in A.terms.items():
        for (e, (x1, x2)), d in spec.bracket_terms({a1: 1}, b.terms).items():
            add_into(out, ((e,), (x1, shift_word(a2, e, order), x2)), c * d)
    return Laurent._raw(spec.sig, 3, 1, out)


def bracket_tensor_R(spec: BracketSpec, A: Tensor, b: NCPoly) -> Laurent:
    """{{a' (x) a'' _lambda b}}_R = (|_{x=S} a') (x)_1 {{a'' _{lambda x} b}}."""
    order = spec.sig.order
    out: dict = {}
    for (a1, a2), c in A.terms.items():
        for (e, (x1, x2)), d in spec.bracket_terms({a2: 1}, b.terms).items():
            add_into(out, ((e,), (x1, shift_word(a1, e, order), x2)), c * d)
    return Laurent._raw(spec.sig, 3, 1, out)


def triple_bracket(spec: BracketSpec, a, b, c, inner: BracketSpec | None = None) -> Laurent:
    """{{a _l {{b _m c}}}}_L - {{b _m {{a _l c}}}}_R - {{{{a _l b}}_{l m} c}}_L.

    The result is a two-variable ``Laurent`` in (lambda, mu). When ``inner``
    is given, the inner brackets use it and the outer ones use ``spec``;
    this polarisation makes the defect bilinear in the two specs.
    """
    sig = spec.sig
    a, b, c = (_as_poly(sig, x) for x in (a, b, c))
    inner = inner or spec
    order = sig.order
    out: dict = {}

    def red(e: tuple[int, int]) -> tuple[int, int]:
        return (e[0] % order, e[1] % order) if order else e

    for (p, (b1, b2)), cb in inner.bracket_terms(b.terms, c.terms).items():
        for (q, (x1, x2)), d in spec.bracket_terms(a.terms, {b1: 1}).items():
            add_into(out, (red((q, p)), (x1, x2, b2)), cb * d)
    for (p, (c1, c2)), cc in inner.bracket_terms(a.terms, c.terms).items():
        for (q, (y1, y2)), d in spec.bracket_terms(b.terms, {c2: 1}).items():
            add_into(out, (red((p, q)), (c1, y1, y2)), -cc * d)
    for (n, (a1, a2)), ca in inner.bracket_terms(a.terms, b.terms).items():
        for (k, (d1, d2)), d in spec.bracket_terms({a1: 1}, c.terms).items():
            add_into(out, (red((n + k, k)), (d1, shift_word(a2, k, order), d2)), -ca * d)
    return Laurent._raw(sig, 3, 2, out)


# -- axiom checks ----------------------------------------------------------


def check_skew(spec: BracketSpec) -> tuple[bool, tuple[int, int] | None]:
    """H* = -H exactly. The witness is the first failing (i, j) entry of H, 0-based."""
    return is_skew_adjoint(spec.H)


@dataclass
class JacobiReport:
    ok: bool
    failures: list[tuple[tuple[int, int, int], Laurent]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _map(fn, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def check_jacobi(spec: BracketSpec, threads: int = 1, require_skew: bool = True) -> JacobiReport:
    """Triple bracket on every generator triple with shift 0."""
    if require_skew:
        ok, where = check_skew(spec)
        if not ok:
            raise SkewError(f"bracket is not skewsymmetric (entry {where})")
    sig = spec.sig
    gens = [NCPoly.gen(sig, i) for i in range(sig.nvars)]
    triples = sorted(product(range(sig.nvars), repeat=3))
    defects = _map(lambda t: triple_bracket(spec, gens[t[0]], gens[t[1]], gens[t[2]]), triples, threads)
    failures = [(t, d) for t, d in zip(triples, defects) if not d.is_zero()]
    return JacobiReport(not failures, failures)


def is_dmpva(spec: BracketSpec, threads: int = 1) -> bool:
    return check_skew(spec)[0] and check_jacobi(spec, threads).ok


# -- lattice double Poisson correspondence --------------------------------


@dataclass
class LatticeDPSpec:
    """Generator data of a local lattice double Poisson algebra.

    With ``automorphism`` unset, S is the shift and ``data[(i, j, n)]`` is
    {{S^n(u_i), u_j}}. Otherwise ``automorphism[i]`` lists ``(coeff, j)`` with
    S(x_i) = sum coeff * x_j, S has order ``sig.order``, and ``data[(i, j, 0)]``
    holds the double Poisson bracket {{x_i, x_j}} on generators.
    """

    sig: Signature
    data: dict[tuple[int, int, int], Tensor]
    automorphism: dict[int, list[tuple[Fraction, int]]] | None = None

    def __post_init__(self) -> None:
        self.data = {k: t for k, t in self.data.items() if t}
        if self.automorphism is None and self.sig.order:
            self.data = _merge_mod(self.data, self.sig.order)

    def bracket(self, a: tuple[int, int], b: tuple[int, int]) -> Tensor:
        """{{u_{i,m}, u_{j,n}}} for a shift-type lattice algebra."""
        if self.automorphism is not None:
            raise ValueError("only shift-type lattice data is indexed by shifts")
        (i, m), (j, n) = a, b
        t = self.data.get((i, j, self.sig.red(m - n)))
        if t is None:
            return Tensor.zero(self.sig, 2)
        return Tensor._raw(self.sig, 2, shift_terms(t.terms, n, self.sig.order))


def _merge_mod(data: dict, order: int) -> dict:
    out: dict = {}
    for (i, j, n), t in data.items():
        key = (i, j, n % order)
        out[key] = out[key] + t if key in out else t
    return {k: t for k, t in out.items() if t}


def residue_to_lattice(spec: BracketSpec) -> LatticeDPSpec:
    """{{S^n u_i, u_j}} is the lambda^n coefficient of {{u_i _lambda u_j}}."""
    data: dict = {}
    for (i, j), p in spec.pairs.items():
        for (n,), t in p.coeffs():
            data[(i, j, n)] = t
    return LatticeDPSpec(spec.sig, data)


def lattice_to_lambda(ldp: LatticeDPSpec) -> BracketSpec:
    """{{a _lambda b}} = sum_n lambda^n {{S^n a, b}} on generators."""
    sig = ldp.sig
    pairs: dict = {}
    if ldp.automorphism is None:
        for (i, j, n), t in ldp.data.items():
            term = Laurent.monomial(t, (n,))
            pairs[(i, j)] = pairs[(i, j)] + term if (i, j) in pairs else term
        return BracketSpec(sig, pairs)
    order = sig.order
    if not order:
        raise ValueError("a non-shift automorphism must have finite order")
    base = {(i, j): t for (i, j, _), t in ldp.data.items()}
    for i in range(sig.nvars):
        image = {i: Fraction(1)}
        for n in range(order):
            for j in range(sig.nvars):
                acc = Tensor.zero(sig, 2)
                for a, c in image.items():
                    t = base.get((a, j))
                    if t is not None:
                        acc = acc + t.scale(c)
                if acc:
                    term = Laurent.monomial(acc, (n,))
                    pairs[(i, j)] = pairs[(i, j)] + term if (i, j) in pairs else term
            nxt: dict = {}
            for a, c in image.items():
                for d, b in ldp.automorphism.get(a, ()):
                    add_into(nxt, b, c * Fraction(d))
            image = nxt
    return BracketSpec(sig, pairs)


# -- one-variable classification ------------------------------------------


def class1_bracket(f: Tensor, N: int) -> BracketSpec:
    """{{u _lambda u}} = f lambda^N - (lambda S)^-N f^sigma on a one-variable algebra."""
    if f.sig.nvars != 1:
        raise ValueError("needs a one-variable signature")
    if N < 1:
        raise ValueError("N must be positive")
    order = f.sig.order
    back = {(q, p): c for (p, q), c in shift_terms(f.terms, -N, order).items()}
    p = Laurent.monomial(f, (N,)) - Laurent.monomial(Tensor._raw(f.sig, 2, back), (-N,))
    return BracketSpec(f.sig, {(0, 0): p})


def class1_form(sig: Signature, N: int, alpha, beta) -> Tensor:
    """g . S^N g with g = (alpha u + beta) (x) (alpha u + beta)."""
    x = NCPoly.gen(sig, 0).scale(alpha) + Fraction(beta)
    g = Tensor.pure(x, x)
    return Tensor._raw(sig, 2, bullet_terms(g.terms, shift_terms(g.terms, N, sig.order)))


def check_class_r1(f: Tensor, N: int) -> tuple[bool, tuple[Fraction, Fraction] | None]:
    """Is f a nonzero multiple of ((u+t)(x)(u+t)) . S^N((u+t)(x)(u+t)), or of 1 (x) 1?

    Over the algebraic closure any nonzero scalar c is alpha^4 for some alpha,
    so f = c * F_t is exactly the family g . S^N g with beta = t * alpha.
    The witness is ``(c, t)``, or ``(c, None)`` for the alpha = 0 branch.
    """
    sig = f.sig
    if not f:
        return True, (Fraction(0), None)
    u, uN = (0, 0), (0, sig.red(N))
    c4 = f.terms.get(((u, uN), (uN, u)), 0)
    if c4:
        t = Fraction(f.terms.get(((u, uN), (uN,)), 0)) / c4
        cand = class1_form(sig, N, 1, t).scale(c4)
        return (cand == f), (Fraction(c4), t)
    c0 = f.terms.get((EMPTY, EMPTY), 0)
    if c0 and f == Tensor.unit(sig).scale(c0):
        return True, (Fraction(c0), None)
    return False, None


# -- two-variable classification ------------------------------------------

KIdx = tuple[int, int, int, int]


def class2_g(sig: Signature, k: int, K: Mapping[KIdx, object]) -> Tensor:
    """g_k = sum K_abcd v^a u_k^b (x) u_k^c v^d with u, v the variables 0, 1."""
    u, v = (0, sig.red(k)), (1, 0)
    out: dict = {}
    for (a, b, c, d), coef in K.items():
        if coef:
            left = (v,) * a + (u,) * b
            right = (u,) * c + (v,) * d
            add_into(out, (left, right), Fraction(coef))
    return Tensor._raw(sig, 2, out)


def class2_bracket(sig: Signature, Ks: Mapping[int, Mapping[KIdx, object]]) -> BracketSpec:
    """{{u u}} = {{v v}} = 0, {{u _l v}} = sum_k g_k l^k and {{v _l u}} fixed by skewsymmetry."""
    order = sig.order
    uv = Laurent.zero(sig)
    vu = Laurent.zero(sig)
    for k, K in Ks.items():
        g = class2_g(sig, k, K)
        uv = uv + Laurent.monomial(g, (k,))
        back = {(q, p): -c for (p, q), c in shift_terms(g.terms, -k, order).items()}
        vu = vu + Laurent.monomial(Tensor._raw(sig, 2, back), (-k,))
    return BracketSpec(sig, {(0, 1): uv, (1, 0): vu})


def _table(K: Mapping[KIdx, object]) -> list:
    out = [0] * 16
    for (a, b, c, d), v in K.items():
        if v:
            f = Fraction(v)
            out[8 * a + 4 * b + 2 * c + d] = f.numerator if f.denominator == 1 else f
    return out


def class2_conditions(Ks: Mapping[int, Mapping[KIdx, object]], alt: bool = False, first: bool = False) -> list[str]:
    """The quadratic conditions on the coefficients; returns the violated ones.

    By default the last two per-k conditions are the single-product
    equalities; ``alt=True`` uses their summed form instead. With ``first``
    the scan stops at the first violation.
    """
    bad: list[str] = []
    tables = {k: _table(K) for k, K in Ks.items()}
    ks = sorted(k for k, t in tables.items() if any(t))
    bits = (0, 1)

    def fail(msg: str) -> bool:
        bad.append(msg)
        return first

    for k in ks:
        T = tables[k]
        for l in ks:
            if k == l:
                continue
            L = tables[l]
            for b, c, d, a2, b2, c2 in product(bits, repeat=6):
                lhs = T[8 + 4 * b + 2 * c + d] * L[8 * a2 + 4 * b2 + 2 * c2]
                rhs = T[4 * b + 2 * c + d] * L[8 * a2 + 4 * b2 + 2 * c2 + 1]
                if lhs != rhs and fail(f"kl1 k={k} l={l} bcd={b}{c}{d} a'b'c'={a2}{b2}{c2}"):
                    return bad
            for a, b, d, a2, c2, d2 in product(bits, repeat=6):
                lhs = T[8 * a + 4 * b + 2 + d] * L[8 * a2 + 2 * c2 + d2]
                rhs = T[8 * a + 4 * b + d] * L[8 * a2 + 4 + 2 * c2 + d2]
                if lhs != rhs and fail(f"kl2 k={k} l={l} abd={a}{b}{d} a'c'd'={a2}{c2}{d2}"):
                    return bad
    for k in ks:
        T = tables[k]
        for a, b, c, d in product(bits, repeat=4):
            ab, cd = 8 * a + 4 * b, 2 * c + d
            for e in bits:
                if T[ab + 2 + e] * T[8 * e + cd] != T[ab + e] * T[8 * e + 4 + cd]:
                    if fail(f"d1 k={k} abcd={a}{b}{c}{d} eps={e}"):
                        return bad
                if T[ab + 2 * e] * T[8 + 4 * e + cd] != T[ab + 2 * e + 1] * T[4 * e + cd]:
                    if fail(f"c1 k={k} abcd={a}{b}{c}{d} eps={e}"):
                        return bad
            x10, x01 = T[ab + 2] * T[8 + cd], T[ab + 1] * T[4 + cd]
            x00, x11 = T[ab] * T[12 + cd], T[ab + 3] * T[cd]
            d2 = (x10 + x11 == x00 + x01) if alt else (x10 == x01)
            c2 = (x10 + x00 == x11 + x01) if alt else (x00 == x11)
            if not d2 and fail(f"d2 k={k} abcd={a}{b}{c}{d}"):
                return bad
            if not c2 and fail(f"c2 k={k} abcd={a}{b}{c}{d}"):
                return bad
    return bad


def check_class_r2(Ks: Mapping[int, Mapping[KIdx, object]], alt: bool = False) -> tuple[bool, list[str]]:
    bad = class2_conditions(Ks, alt)
    return not bad, bad


def class_r2_holds(Ks: Mapping[int, Mapping[KIdx, object]], alt: bool = False) -> bool:
    return not class2_conditions(Ks, alt, first=True)


def k_from_bits(bits: int) -> dict[KIdx, int]:
    """Decode a 16-bit integer into a 0/1 coefficient table (bit 8a+4b+2c+d)."""
    return {idx: (bits >> (8 * idx[0] + 4 * idx[1] + 2 * idx[2] + idx[3])) & 1 for idx in product((0, 1), repeat=4)}


def one_term_family(sig: Signature, case: str, k: int, a, b=0) -> BracketSpec:
    """The five one-term families of two-variable brackets, by case label i..v."""
    a, b = Fraction(a), Fraction(b)
    K: dict[KIdx, Fraction] = {}
    if case == "i":
        K[(0, 0, 0, 0)] = a
    elif case == "ii":
        K[(1, 0, 0, 1)] = a
    elif case == "iii":
        K[(0, 1, 1, 0)] = a
    elif case == "iv":
        K[(1, 0, 0, 1)] = a
        K[(1, 0, 1, 0)] = b
        K[(0, 1, 0, 1)] = b
        K[(0, 1, 1, 0)] = b * b / a
    elif case == "v":
        K[(1, 1, 1, 1)] = a
        K[(1, 1, 0, 0)] = b
        K[(0, 0, 1, 1)] = b
        K[(0, 0, 0, 0)] = b * b / a
    else:
        raise ValueError(f"unknown case {case!r}")
    return class2_bracket(sig, {k: K})


def one_term_family_table(case: str, a, b=0) -> dict[KIdx, Fraction]:
    spec_k = {"i": {(0, 0, 0, 0): a}, "ii": {(1, 0, 0, 1): a}, "iii": {(0, 1, 1, 0): a}}
    if case in spec_k:
        return {k: Fraction(v) for k, v in spec_k[case].items()}
    a, b = Fraction(a), Fraction(b)
    if case == "iv":
        return {(1, 0, 0, 1): a, (1, 0, 1, 0): b, (0, 1, 0, 1): b, (0, 1, 1, 0): b * b / a}
    if case == "v":
        return {(1, 1, 1, 1): a, (1, 1, 0, 0): b, (0, 0, 1, 1): b, (0, 0, 0, 0): b * b / a}
    raise ValueError(f"unknown case {case!r}")


def not_jacobi_bracket(sig: Signature, alpha, beta, r: int) -> BracketSpec:
    """{{u _l v}} = (v(x)u_r + u_r(x)v + alpha v(x)v + beta u_r(x)u_r) l^r."""
    K = {(1, 0, 1, 0): 1, (0, 1, 0, 1): 1, (1, 0, 0, 1): Fraction(alpha), (0, 1, 1, 0): Fraction(beta)}
    return class2_bracket(sig, {r: K})


# -- polarised Jacobi defect for coefficient families ---------------------


def jacobi_quadratic_form(basis: list[BracketSpec], triples: Iterable[tuple[int, int, int]] | None = None) -> dict:
    """Defects T(p, q) = triple(outer=basis[p], inner=basis[q]) on generator triples.

    For H = sum_p K_p basis[p] the Jacobi defect is sum_{p,q} K_p K_q T(p, q).
    Returns ``{(p, q): {(triple, exps, key): coeff}}`` with zero entries dropped.
    """
    sig = basis[0].sig
    gens = [NCPoly.gen(sig, i) for i in range(sig.nvars)]
    if triples is None:
        triples = list(product(range(sig.nvars), repeat=3))
    out: dict = {}
    for p, outer in enumerate(basis):
        for q, inner in enumerate(basis):
            acc: dict = {}
            for t in triples:
                d = triple_bracket(outer, gens[t[0]], gens[t[1]], gens[t[2]], inner=inner)
                for (e, k), c in d.terms.items():
                    acc[(t, e, k)] = c
            if acc:
                out[(p, q)] = acc
    return out
