"""Tensor powers of R_l and the structural operations on them.

A ``Tensor`` of arity k maps k-tuples of words to rationals. Slots in the
public API are 1-based where they name a tensor factor (``partial_at``)
and follow the ``*_i`` / ``(x)_i`` conventions elsewhere, with ``i``
counted from 0.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping

from .ncalg import EMPTY, NCPoly, Signature, Word, add_into, format_terms, format_word, partial_word, shift_word, word_key

MAX_ARITY = 4

TKey = tuple[Word, ...]


class Mode(Enum):
    MUL_LEFT = "mul_left"          # b *_i t
    MUL_RIGHT = "mul_right"        # t *_i b
    TENSOR_LEFT = "tensor_left"    # b (x)_i t
    TENSOR_RIGHT = "tensor_right"  # t (x)_i b
    OUTER_L = "outer_l"            # a A   = aA' (x) A''
    OUTER_R = "outer_r"            # A b   = A' (x) A''b
    INNER_L = "inner_l"            # a * A = A' (x) aA''
    INNER_R = "inner_r"            # A * b = A'b (x) A''


def tensor_key(key: TKey):
    return tuple(word_key(w) for w in key)


class Tensor:
    __slots__ = ("sig", "arity", "terms", "_hash")

    def __init__(self, sig: Signature, arity: int, terms: Mapping[TKey, object] | None = None):
        if not 1 <= arity <= MAX_ARITY:
            raise ValueError(f"arity {arity} outside 1..{MAX_ARITY}")
        self.sig = sig
        self.arity = arity
        out: dict[TKey, Fraction] = {}
        for key, c in (terms or {}).items():
            if len(key) != arity:
                raise ValueError(f"key {key} does not have arity {arity}")
            if sig.order:
                key = tuple(shift_word(w, 0, sig.order) for w in key)
            add_into(out, tuple(tuple(w) for w in key), Fraction(c))
        self.terms = out
        self._hash = None

    @classmethod
    def _raw(cls, sig: Signature, arity: int, terms: dict) -> "Tensor":
        if arity > MAX_ARITY:
            raise ValueError(f"arity {arity} exceeds {MAX_ARITY}")
        t = cls.__new__(cls)
        t.sig = sig
        t.arity = arity
        t.terms = terms
        t._hash = None
        return t

    @classmethod
    def zero(cls, sig: Signature, arity: int) -> "Tensor":
        return cls._raw(sig, arity, {})

    @classmethod
    def unit(cls, sig: Signature, arity: int = 2) -> "Tensor":
        return cls._raw(sig, arity, {(EMPTY,) * arity: Fraction(1)})

    @classmethod
    def pure(cls, *factors: NCPoly) -> "Tensor":
        """Multilinear expansion of ``p1 (x) p2 (x) ...``."""
        sig = factors[0].sig
        acc: dict[TKey, Fraction] = {(): Fraction(1)}
        for p in factors:
            if p.sig != sig:
                raise ValueError("signature mismatch")
            nxt: dict[TKey, Fraction] = {}
            for key, c in acc.items():
                for w, d in p.terms.items():
                    add_into(nxt, key + (w,), c * d)
            acc = nxt
        return cls._raw(sig, len(factors), acc)

    def _check(self, other: "Tensor") -> None:
        if not isinstance(other, Tensor):
            raise TypeError(f"expected Tensor, got {type(other).__name__}")
        if self.sig != other.sig:
            raise ValueError("signature mismatch")
        if self.arity != other.arity:
            raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            add_into(out, k, c)
        return Tensor._raw(self.sig, self.arity, out)

    def __neg__(self) -> "Tensor":
        return Tensor._raw(self.sig, self.arity, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + (-other)

    def scale(self, c) -> "Tensor":
        c = Fraction(c)
        if not c:
            return Tensor.zero(self.sig, self.arity)
        return Tensor._raw(self.sig, self.arity, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, c) -> "Tensor":
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.sig == other.sig and self.arity == other.arity and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self) -> Iterator[tuple[TKey, Fraction]]:
        for k in sorted(self.terms, key=tensor_key):
            yield k, self.terms[k]

    def factor(self, slot: int) -> NCPoly:
        """For a pure-looking tensor, the polynomial in one slot (debug aid)."""
        out: dict = {}
        for key, c in self.terms.items():
            add_into(out, key[slot], c)
        return NCPoly._raw(self.sig, out)

    def __str__(self) -> str:
        return format_tensor(self)

    def __repr__(self) -> str:
        return f"Tensor[{self.arity}]({self})"


def format_key(sig: Signature, key: TKey) -> str:
    return " ⊗ ".join(format_word(sig, w) for w in key)


def format_tensor(t: Tensor) -> str:
    if t.arity == 1:
        return format_terms(t.sig, [(k[0], c) for k, c in t])
    body = format_terms(t.sig, list(t), fmt=lambda k: "(" + format_key(t.sig, k) + ")")
    return body


def as_tensor1(p: NCPoly) -> Tensor:
    return Tensor._raw(p.sig, 1, {(w,): c for w, c in p.terms.items()})


# -- raw term-map kernels, shared with the bracket engine -----------------


def sigma_terms(terms: dict) -> dict:
    return {key[-1:] + key[:-1]: c for key, c in terms.items()}


def bullet_terms(a: dict, b: dict) -> dict:
    out: dict = {}
    for (a1, a2), c in a.items():
        for (b1, b2), d in b.items():
            add_into(out, (a1 + b1, b2 + a2), c * d)
    return out


def shift_terms(terms: dict, m: int, order: int | None) -> dict:
    if m == 0 or (order and m % order == 0):
        return terms
    return {tuple(shift_word(w, m, order) for w in key): c for key, c in terms.items()}


# -- public operations ----------------------------------------------------


def sigma(t: Tensor) -> Tensor:
    """Cyclic rotation moving the last factor to the front."""
    return Tensor._raw(t.sig, t.arity, sigma_terms(t.terms))


def bullet(A: Tensor, B: Tensor) -> Tensor:
    """A.B = A'B' (x) B''A''."""
    A._check(B)
    if A.arity != 2:
        raise ValueError("the bullet product lives on V (x) V")
    return Tensor._raw(A.sig, 2, bullet_terms(A.terms, B.terms))


def _poly_terms(b) -> dict:
    if isinstance(b, NCPoly):
        return b.terms
    if isinstance(b, Tensor) and b.arity == 1:
        return {k[0]: c for k, c in b.terms.items()}
    raise TypeError("expected a polynomial")


def insert(t: Tensor, i: int, b: NCPoly, mode: Mode) -> Tensor:
    """The module actions and tensor insertions of a polynomial ``b``."""
    if isinstance(b, NCPoly) and b.sig != t.sig:
        raise ValueError("signature mismatch")
    n = t.arity
    bt = _poly_terms(b)
    if mode in (Mode.OUTER_L, Mode.OUTER_R, Mode.INNER_L, Mode.INNER_R):
        if n != 2:
            raise ValueError("inner/outer bimodule actions need arity 2")
        pos, left = {
            Mode.OUTER_L: (0, True),
            Mode.OUTER_R: (1, False),
            Mode.INNER_L: (1, True),
            Mode.INNER_R: (0, False),
        }[mode]
        return _mul_slot(t, pos, bt, left)
    if mode == Mode.MUL_LEFT:
        return _mul_slot(t, i % n, bt, True)
    if mode == Mode.MUL_RIGHT:
        return _mul_slot(t, (n - (i % n)) - 1, bt, False)
    if not 0 <= i <= n - 1:
        raise ValueError(f"invalid slot {i} for arity {n}")
    if n + 1 > MAX_ARITY:
        raise ValueError(f"arity {n + 1} exceeds {MAX_ARITY}")
    pos = i if mode == Mode.TENSOR_LEFT else n - i
    out: dict = {}
    for key, c in t.terms.items():
        for w, d in bt.items():
            add_into(out, key[:pos] + (w,) + key[pos:], c * d)
    return Tensor._raw(t.sig, n + 1, out)


def _mul_slot(t: Tensor, pos: int, bt: dict, left: bool) -> Tensor:
    out: dict = {}
    for key, c in t.terms.items():
        for w, d in bt.items():
            nw = w + key[pos] if left else key[pos] + w
            add_into(out, key[:pos] + (nw,) + key[pos + 1:], c * d)
    return Tensor._raw(t.sig, t.arity, out)


def bullet_i_terms(a: dict, x: dict, i: int, left: bool) -> dict:
    out: dict = {}
    for (p, q), c in a.items():
        for (x1, x2, x3), d in x.items():
            if left:
                if i == 1:
                    key = (x1, p + x2, x3 + q)
                elif i == 2:
                    key = (p + x1, x2, x3 + q)
                else:
                    key = (p + x1, x2 + q, x3)
            else:
                if i == 1:
                    key = (x1, x2 + p, q + x3)
                elif i == 2:
                    key = (x1 + p, x2, q + x3)
                else:
                    key = (x1 + p, q + x2, x3)
            add_into(out, key, c * d)
    return out


def bullet_i(A: Tensor, X: Tensor, i: int, side: str = "left") -> Tensor:
    """The left (``A .i X``) or right (``X .i A``) actions of V(x)V on V(x)3."""
    if A.arity != 2 or X.arity != 3:
        raise ValueError("bullet_i acts by V(x)V on V(x)V(x)V")
    if A.sig != X.sig:
        raise ValueError("signature mismatch")
    if i not in (1, 2, 3):
        raise ValueError("i must be 1, 2 or 3")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    return Tensor._raw(A.sig, 3, bullet_i_terms(A.terms, X.terms, i, side == "left"))


def mult(t: Tensor) -> NCPoly:
    """Concatenate all factors."""
    out: dict = {}
    for key, c in t.terms.items():
        add_into(out, sum(key, EMPTY), c)
    return NCPoly._raw(t.sig, out)


def partial_at_terms(terms: dict, slot: int, g) -> dict:
    out: dict = {}
    for key, c in terms.items():
        for pre, post in partial_word(key[slot], g):
            add_into(out, key[:slot] + (pre, post) + key[slot + 1:], c)
    return out


def partial_at(t: Tensor, slot: int, i: int, n: int) -> Tensor:
    """Apply d/du_{i,n} in one factor (1-based ``slot``)."""
    if not 1 <= slot <= t.arity:
        raise ValueError(f"invalid slot {slot} for arity {t.arity}")
    if t.arity + 1 > MAX_ARITY:
        raise ValueError(f"arity {t.arity + 1} exceeds {MAX_ARITY}")
    terms = partial_at_terms(t.terms, slot - 1, (i, t.sig.red(n)))
    return Tensor._raw(t.sig, t.arity + 1, terms)


def partial_L(t: Tensor, i: int, n: int) -> Tensor:
    return partial_at(t, 1, i, n)


def partial_R(t: Tensor, i: int, n: int) -> Tensor:
    return partial_at(t, t.arity, i, n)


def shift_tensor(t: Tensor, m: int) -> Tensor:
    return Tensor._raw(t.sig, t.arity, shift_terms(t.terms, m, t.sig.order))
