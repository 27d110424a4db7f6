"""Free noncommutative difference algebra R_l over the rationals.

A generator ``u_{i,n}`` is stored as the pair ``(i, n)`` with ``i`` a
0-based variable index. A word is a tuple of generators and the empty
tuple is the unit. Polynomials map words to exact rational coefficients.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

Gen = tuple[int, int]
Word = tuple[Gen, ...]

EMPTY: Word = ()


@dataclass(frozen=True)
class Signature:
    """Variable names plus the order of the shift (``None`` means infinite)."""

    names: tuple[str, ...]
    order: int | None = None

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("signature needs at least one variable")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                raise ValueError(f"bad variable name {name!r}")
        if self.order is not None and self.order < 1:
            raise ValueError("finite shift order must be >= 1")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def red(self, n: int) -> int:
        """Reduce a shift (or a lambda exponent) in finite-order mode."""
        return n % self.order if self.order else n

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None


def word_key(w: Word) -> tuple[int, Word]:
    """Length first, then lexicographic on (var, shift)."""
    return (len(w), w)


def shift_word(w: Word, m: int, order: int | None) -> Word:
    if order:
        return tuple((i, (n + m) % order) for i, n in w)
    return tuple((i, n + m) for i, n in w)


def add_into(acc: dict, key, c) -> None:
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def clean(terms: Mapping) -> dict:
    return {k: Fraction(v) for k, v in terms.items() if v}


class NCPoly:
    """Element of R_l: a finite map from words to nonzero rationals."""

    __slots__ = ("sig", "terms", "_hash")

    def __init__(self, sig: Signature, terms: Mapping[Word, object] | None = None):
        self.sig = sig
        out: dict[Word, Fraction] = {}
        if terms:
            order = sig.order
            for w, c in terms.items():
                if order:
                    w = tuple((i, n % order) for i, n in w)
                for i, _ in w:
                    if not 0 <= i < sig.nvars:
                        raise ValueError(f"variable index {i} out of range")
                add_into(out, w, Fraction(c))
        self.terms = out
        self._hash = None

    @classmethod
    def _raw(cls, sig: Signature, terms: dict) -> "NCPoly":
        # terms already reduced and free of zeros
        p = cls.__new__(cls)
        p.sig = sig
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, sig: Signature, c=1) -> "NCPoly":
        return cls(sig, {EMPTY: c})

    @classmethod
    def gen(cls, sig: Signature, i: int | str, n: int = 0) -> "NCPoly":
        if isinstance(i, str):
            i = sig.index(i)
        return cls(sig, {((i, n),): 1})

    @classmethod
    def parse(cls, sig: Signature, text: str) -> "NCPoly":
        return parse_poly(sig, text)

    def _check(self, other: "NCPoly") -> None:
        if self.sig != other.sig:
            raise ValueError("signature mismatch")

    def _coerce(self, other) -> "NCPoly":
        if isinstance(other, NCPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return NCPoly.const(self.sig, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for w, c in other.terms.items():
            add_into(out, w, c)
        return NCPoly._raw(self.sig, out)

    __radd__ = __add__

    def __neg__(self) -> "NCPoly":
        return NCPoly._raw(self.sig, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return nc_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "NCPoly":
        if k < 0:
            raise ValueError("negative powers are not available in R_l")
        out = NCPoly.const(self.sig)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c) -> "NCPoly":
        c = Fraction(c)
        if not c:
            return NCPoly._raw(self.sig, {})
        return NCPoly._raw(self.sig, {w: c * v for w, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = NCPoly.const(self.sig, other)
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.sig == other.sig and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.sig, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[tuple[Word, Fraction]]:
        for w in sorted(self.terms, key=word_key):
            yield w, self.terms[w]

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def shift(self, m: int) -> "NCPoly":
        return shift(self, m)

    def partial(self, i: int, n: int):
        return partial(self, i, n)

    def support(self) -> set[Gen]:
        return support(self)

    def __str__(self) -> str:
        return format_terms(self.sig, [(w, c) for w, c in self])

    def __repr__(self) -> str:
        return f"NCPoly({self})"


def nc_mul(p: NCPoly, q: NCPoly) -> NCPoly:
    p._check(q)
    out: dict[Word, Fraction] = {}
    for w1, c1 in p.terms.items():
        for w2, c2 in q.terms.items():
            add_into(out, w1 + w2, c1 * c2)
    return NCPoly._raw(p.sig, out)


def shift(p: NCPoly, m: int) -> NCPoly:
    """The automorphism S^m."""
    if m == 0:
        return p
    order = p.sig.order
    return NCPoly._raw(p.sig, {shift_word(w, m, order): c for w, c in p.terms.items()})


def partial_word(w: Word, g: Gen) -> Iterator[tuple[Word, Word]]:
    for k, letter in enumerate(w):
        if letter == g:
            yield w[:k], w[k + 1:]


def partial(p: NCPoly, i: int, n: int):
    """The 2-fold derivative d/du_{i,n}, valued in V (x) V."""
    from .tensor import Tensor

    g = (i, p.sig.red(n))
    out: dict = {}
    for w, c in p.terms.items():
        for pair in partial_word(w, g):
            add_into(out, pair, c)
    return Tensor._raw(p.sig, 2, out)


def support(p: NCPoly) -> set[Gen]:
    """Generators (i, n) with a nonzero partial derivative."""
    return {g for w in p.terms for g in w}


def all_partials(p: NCPoly) -> dict[Gen, dict]:
    """Every nonzero partial derivative at once, as raw term maps."""
    out: dict[Gen, dict] = {}
    for w, c in p.terms.items():
        for k, g in enumerate(w):
            add_into(out.setdefault(g, {}), (w[:k], w[k + 1:]), c)
    return {g: t for g, t in out.items() if t}


# -- printing -------------------------------------------------------------


def format_gen(sig: Signature, g: Gen) -> str:
    i, n = g
    return sig.names[i] if n == 0 else f"{sig.names[i]}[{n}]"


def format_word(sig: Signature, w: Word) -> str:
    if not w:
        return "1"
    parts = []
    k = 0
    while k < len(w):
        j = k
        while j < len(w) and w[j] == w[k]:
            j += 1
        s = format_gen(sig, w[k])
        parts.append(s if j - k == 1 else f"{s}^{j - k}")
        k = j
    return "*".join(parts)


def format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_terms(sig: Signature, items: Iterable[tuple[Word, Fraction]], fmt=None) -> str:
    """Render ``sum c*w``; ``fmt`` overrides how a key is printed."""
    fmt = fmt or (lambda key: format_word(sig, key))
    out = []
    for key, c in items:
        body = fmt(key)
        mag = abs(c)
        if body == "1":
            s = format_coeff(mag)
        elif mag == 1:
            s = body
        else:
            s = f"{format_coeff(mag)}*{body}"
        if not out:
            out.append(s if c > 0 else f"-{s}")
        else:
            out.append(("+ " if c > 0 else "- ") + s)
    return " ".join(out) if out else "0"


# -- parsing --------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at column {pos + 1}: {text!r}")
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^/()\[\]]))"
)


def _tokens(text: str) -> list[tuple[str, str, int]]:
    text = text.replace("−", "-")
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character", text, pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, sig: Signature, text: str):
        self.sig = sig
        self.text = text
        self.toks = _tokens(text)
        self.k = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.k]

    def take(self, value: str | None = None, kind: str | None = None):
        tok = self.toks[self.k]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            raise ParseError(f"expected {want!r}", self.text, tok[2])
        self.k += 1
        return tok

    def expr(self) -> NCPoly:
        acc = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> NCPoly:
        sign = 1
        while self.peek()[1] in ("+", "-"):
            if self.take()[1] == "-":
                sign = -sign
        acc = self.factor()
        while self.peek()[1] == "*":
            self.take()
            acc = acc * self.factor()
        return acc if sign > 0 else -acc

    def factor(self) -> NCPoly:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take(kind="num")
            if int(val) < 1:
                raise ParseError("exponent must be a positive integer", self.text, pos)
            base = base ** int(val)
        return base

    def atom(self) -> NCPoly:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            c = Fraction(int(val))
            if self.peek()[1] == "/":
                self.take()
                _, den, dpos = self.take(kind="num")
                if int(den) == 0:
                    raise ParseError("zero denominator", self.text, dpos)
                c /= int(den)
            return NCPoly.const(self.sig, c)
        if kind == "ident":
            self.take()
            try:
                i = self.sig.index(val)
            except KeyError:
                raise ParseError(f"unknown variable {val!r}", self.text, pos) from None
            n = 0
            if self.peek()[1] == "[":
                self.take()
                sign = 1
                if self.peek()[1] in ("+", "-"):
                    sign = -1 if self.take()[1] == "-" else 1
                n = sign * int(self.take(kind="num")[1])
                self.take("]")
            return NCPoly.gen(self.sig, i, n)
        if val == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError("unexpected token", self.text, pos)


def parse_poly(sig: Signature, text: str) -> NCPoly:
    """Parse e.g. ``"1/3*u^3 - v[-2]*u"``. Juxtaposition is not a product."""
    p = _Parser(sig, text)
    if p.peek()[0] == "end":
        raise ParseError("empty expression", text, 0)
    out = p.expr()
    kind, _, pos = p.peek()
    if kind != "end":
        raise ParseError("trailing input", text, pos)
    return out
