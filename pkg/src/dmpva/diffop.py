"""Laurent polynomials with tensor coefficients and matrix difference operators.

``Laurent`` is a polynomial in ``nvars`` formal variables (lambda, mu, ...)
whose coefficients live in V(x)k. It is stored flat as
``{(exps, key): coeff}`` where ``exps`` is a tuple of exponents and ``key``
a k-tuple of words. In finite-order mode the exponents live in Z/e.

``DiffOp`` is an l x l matrix of scalar operators ``sum_n a_n S^n``. Each
entry is kept as its symbol, a one-variable ``Laurent`` of arity 2, but the
class only exposes operator semantics (composition, adjoint, action).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Mapping

from .ncalg import NCPoly, Signature, add_into, shift_word
from .tensor import MAX_ARITY, Mode, Tensor, bullet_terms, format_tensor, insert, shift_terms, sigma_terms, tensor_key

VAR_NAMES = ("λ", "μ", "x")


class Laurent:
    __slots__ = ("sig", "arity", "nvars", "terms")

    def __init__(self, sig: Signature, arity: int, nvars: int, terms: Mapping | None = None):
        self.sig = sig
        self.arity = arity
        self.nvars = nvars
        out: dict = {}
        order = sig.order
        for (exps, key), c in (terms or {}).items():
            if len(exps) != nvars or len(key) != arity:
                raise ValueError("bad Laurent term shape")
            if order:
                exps = tuple(e % order for e in exps)
                key = tuple(shift_word(w, 0, order) for w in key)
            add_into(out, (tuple(exps), tuple(key)), Fraction(c))
        self.terms = out

    @classmethod
    def _raw(cls, sig: Signature, arity: int, nvars: int, terms: dict) -> "Laurent":
        if arity > MAX_ARITY:
            raise ValueError(f"arity {arity} exceeds {MAX_ARITY}")
        p = cls.__new__(cls)
        p.sig = sig
        p.arity = arity
        p.nvars = nvars
        p.terms = terms
        return p

    @classmethod
    def zero(cls, sig: Signature, arity: int = 2, nvars: int = 1) -> "Laurent":
        return cls._raw(sig, arity, nvars, {})

    @classmethod
    def monomial(cls, t: Tensor, exps: tuple[int, ...]) -> "Laurent":
        order = t.sig.order
        if order:
            exps = tuple(e % order for e in exps)
        return cls._raw(t.sig, t.arity, len(exps), {(tuple(exps), k): c for k, c in t.terms.items()})

    @classmethod
    def from_coeffs(cls, sig: Signature, arity: int, nvars: int, coeffs: Mapping[tuple[int, ...], Tensor]) -> "Laurent":
        out = cls.zero(sig, arity, nvars)
        for exps, t in coeffs.items():
            out = out + cls.monomial(t, exps)
        return out

    def _check(self, other: "Laurent") -> None:
        if not isinstance(other, Laurent):
            raise TypeError(f"expected Laurent, got {type(other).__name__}")
        if self.sig != other.sig:
            raise ValueError("signature mismatch")
        if (self.arity, self.nvars) != (other.arity, other.nvars):
            raise ValueError("arity or variable-count mismatch")

    def __add__(self, other: "Laurent") -> "Laurent":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            add_into(out, k, c)
        return Laurent._raw(self.sig, self.arity, self.nvars, out)

    def __neg__(self) -> "Laurent":
        return Laurent._raw(self.sig, self.arity, self.nvars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Laurent") -> "Laurent":
        return self + (-other)

    def scale(self, c) -> "Laurent":
        c = Fraction(c)
        if not c:
            return Laurent.zero(self.sig, self.arity, self.nvars)
        return Laurent._raw(self.sig, self.arity, self.nvars, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, c) -> "Laurent":
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Laurent):
            return NotImplemented
        return (self.sig, self.arity, self.nvars, self.terms) == (other.sig, other.arity, other.nvars, other.terms)

    def __hash__(self) -> int:
        return hash((self.arity, self.nvars, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def exponents(self) -> list[tuple[int, ...]]:
        return sorted({e for e, _ in self.terms})

    def coeff(self, exps: tuple[int, ...]) -> Tensor:
        if self.sig.order:
            exps = tuple(e % self.sig.order for e in exps)
        return Tensor._raw(self.sig, self.arity, {k: c for (e, k), c in self.terms.items() if e == tuple(exps)})

    def coeffs(self) -> Iterator[tuple[tuple[int, ...], Tensor]]:
        grouped: dict = {}
        for (e, k), c in self.terms.items():
            grouped.setdefault(e, {})[k] = c
        for e in sorted(grouped):
            yield e, Tensor._raw(self.sig, self.arity, grouped[e])

    def times_monomial(self, exps: tuple[int, ...]) -> "Laurent":
        order = self.sig.order
        out = {}
        for (e, k), c in self.terms.items():
            ne = tuple(a + b for a, b in zip(e, exps))
            if order:
                ne = tuple(a % order for a in ne)
            out[(ne, k)] = c
        return Laurent._raw(self.sig, self.arity, self.nvars, out)

    def map_coeffs(self, fn) -> "Laurent":
        """Apply a linear map on V(x)k term maps coefficientwise."""
        out: dict = {}
        arity = self.arity
        for e, t in self.coeffs():
            img = fn(t)
            arity = img.arity
            for k, c in img.terms.items():
                add_into(out, (e, k), c)
        return Laurent._raw(self.sig, arity, self.nvars, out)

    def sigma(self, times: int = 1) -> "Laurent":
        out = self.terms
        for _ in range(times % self.arity):
            out = {(e, k[-1:] + k[:-1]): c for (e, k), c in out.items()}
        return Laurent._raw(self.sig, self.arity, self.nvars, out)

    def shift(self, m: int) -> "Laurent":
        """Apply S^m to every tensor factor."""
        order = self.sig.order
        out = {(e, tuple(shift_word(w, m, order) for w in k)): c for (e, k), c in self.terms.items()}
        return Laurent._raw(self.sig, self.arity, self.nvars, out)

    def at_one(self) -> Tensor:
        """Set every formal variable to 1."""
        out: dict = {}
        for (_, k), c in self.terms.items():
            add_into(out, k, c)
        return Tensor._raw(self.sig, self.arity, out)

    def degree_range(self, var: int = 0) -> tuple[int, int] | None:
        if not self.terms:
            return None
        vals = [e[var] for e, _ in self.terms]
        return min(vals), max(vals)

    def __iter__(self):
        for e, k in sorted(self.terms, key=lambda ek: (ek[0], tensor_key(ek[1]))):
            yield e, k, self.terms[(e, k)]

    def __str__(self) -> str:
        return format_laurent(self)

    def __repr__(self) -> str:
        return f"Laurent({self})"


def format_monomial(exps: tuple[int, ...], names: tuple[str, ...] = VAR_NAMES) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_laurent(p: Laurent, names: tuple[str, ...] = VAR_NAMES) -> str:
    if not p.terms:
        return "0"
    chunks = []
    for e, t in p.coeffs():
        mono = format_monomial(e, names)
        body = format_tensor(t)
        chunks.append(f"[{body}]" + (f"*{mono}" if mono else ""))
    return " + ".join(chunks)


def subst_shift(P: Laurent, b: NCPoly, mode: Mode, slot: int = 0, x: int | None = None, lam: int | None = 0) -> Laurent:
    """Replace ``x^n`` by ``lambda^n`` times the insertion of ``S^n(b)``.

    ``x`` is the index of the marked variable (default: the last one). The
    result drops that variable; its exponent is added to variable ``lam`` of
    the result, or discarded when ``lam`` is None.
    """
    if x is None:
        x = P.nvars - 1
    if P.nvars < 2 and lam is not None:
        raise ValueError("need a variable to receive the substituted exponent")
    by_exp: dict = {}
    for (e, k), c in P.terms.items():
        by_exp.setdefault(e, {})[k] = c
    out: dict = {}
    arity = None
    for e, tmap in by_exp.items():
        n = e[x]
        rest = e[:x] + e[x + 1:]
        if lam is not None:
            rest = rest[:lam] + (rest[lam] + n,) + rest[lam + 1:]
        if P.sig.order:
            rest = tuple(a % P.sig.order for a in rest)
        img = insert(Tensor._raw(P.sig, P.arity, tmap), slot, b.shift(n), mode)
        arity = img.arity
        for k, c in img.terms.items():
            add_into(out, (rest, k), c)
    if arity is None:
        arity = P.arity + (1 if mode in (Mode.TENSOR_LEFT, Mode.TENSOR_RIGHT) else 0)
    return Laurent._raw(P.sig, arity, P.nvars - 1, out)


# -- difference operators -------------------------------------------------


class DiffOp:
    """Matrix difference operator with entries in (V(x)V)[S, S^-1]."""

    __slots__ = ("sig", "size", "entries")

    def __init__(self, sig: Signature, size: int, entries: Mapping[tuple[int, int], Laurent] | None = None):
        self.sig = sig
        self.size = size
        self.entries: dict[tuple[int, int], Laurent] = {}
        for (i, j), a in (entries or {}).items():
            if not (0 <= i < size and 0 <= j < size):
                raise ValueError(f"entry {(i, j)} outside a {size}x{size} matrix")
            if a.arity != 2 or a.nvars != 1:
                raise ValueError("entries must be one-variable symbols with V(x)V coefficients")
            if a.terms:
                self.entries[(i, j)] = a

    @classmethod
    def identity(cls, sig: Signature, size: int) -> "DiffOp":
        one = Laurent.monomial(Tensor.unit(sig), (0,))
        return cls(sig, size, {(i, i): one for i in range(size)})

    @classmethod
    def scalar(cls, a: Laurent) -> "DiffOp":
        return cls(a.sig, 1, {(0, 0): a})

    def entry(self, i: int, j: int) -> Laurent:
        return self.entries.get((i, j), Laurent.zero(self.sig))

    def symbol(self) -> dict[tuple[int, int], Laurent]:
        return dict(self.entries)

    def _check(self, other: "DiffOp") -> None:
        if self.sig != other.sig:
            raise ValueError("signature mismatch")
        if self.size != other.size:
            raise ValueError(f"size mismatch: {self.size} vs {other.size}")

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        keys = set(self.entries) | set(other.entries)
        return DiffOp(self.sig, self.size, {k: self.entry(*k) + other.entry(*k) for k in keys})

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.sig, self.size, {k: -a for k, a in self.entries.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.sig == other.sig and self.size == other.size and self.entries == other.entries

    def __str__(self) -> str:
        rows = []
        for (i, j) in sorted(self.entries):
            rows.append(f"({i + 1},{j + 1}): {format_laurent(self.entries[(i, j)], ('S',))}")
        return "\n".join(rows) if rows else "0"


def compose_scalar(a: Laurent, b: Laurent) -> Laurent:
    """aS^m . bS^n = (a . S^m b) S^(m+n)."""
    order = a.sig.order
    ga: dict = {}
    for (e, k), c in a.terms.items():
        ga.setdefault(e[0], {})[k] = c
    gb: dict = {}
    for (e, k), c in b.terms.items():
        gb.setdefault(e[0], {})[k] = c
    out: dict = {}
    for m, ta in ga.items():
        for n, tb in gb.items():
            prod = bullet_terms(ta, shift_terms(tb, m, order))
            e = m + n
            if order:
                e %= order
            for k, c in prod.items():
                add_into(out, ((e,), k), c)
    return Laurent._raw(a.sig, 2, 1, out)


def compose(A: DiffOp, B: DiffOp) -> DiffOp:
    A._check(B)
    entries: dict = {}
    for (i, k), a in A.entries.items():
        for j in range(B.size):
            b = B.entries.get((k, j))
            if b is None:
                continue
            prod = compose_scalar(a, b)
            entries[(i, j)] = entries[(i, j)] + prod if (i, j) in entries else prod
    return DiffOp(A.sig, A.size, entries)


def adjoint_scalar(a: Laurent) -> Laurent:
    """(a_n S^n)* = S^-n(a_n^sigma) S^-n."""
    order = a.sig.order
    out: dict = {}
    for (e, (p, q)), c in a.terms.items():
        n = e[0]
        ne = -n % order if order else -n
        key = (shift_word(q, -n, order), shift_word(p, -n, order))
        add_into(out, ((ne,), key), c)
    return Laurent._raw(a.sig, 2, 1, out)


def adjoint(A: DiffOp) -> DiffOp:
    return DiffOp(A.sig, A.size, {(j, i): adjoint_scalar(a) for (i, j), a in A.entries.items()})


def apply_to_vector(H: DiffOp, F: list[NCPoly]) -> list[NCPoly]:
    """(HF)_i = sum_j H'_{ij;n} S^n(F_j) H''_{ij;n}."""
    if len(F) != H.size:
        raise ValueError(f"vector of length {len(F)} for a {H.size}x{H.size} operator")
    order = H.sig.order
    out = [dict() for _ in range(H.size)]
    for (i, j), a in H.entries.items():
        for (e, (p, q)), c in a.terms.items():
            for w, d in F[j].terms.items():
                add_into(out[i], p + shift_word(w, e[0], order) + q, c * d)
    return [NCPoly._raw(H.sig, o) for o in out]


def is_skew_adjoint(H: DiffOp) -> tuple[bool, tuple[int, int] | None]:
    """Exact test of H* = -H; the witness is the first failing entry."""
    Hs = adjoint(H)
    for key in sorted(set(H.entries) | set(Hs.entries)):
        if not (Hs.entry(*key) + H.entry(*key)).is_zero():
            return False, key
    return True, None


def is_self_adjoint(H: DiffOp) -> tuple[bool, tuple[int, int] | None]:
    Hs = adjoint(H)
    for key in sorted(set(H.entries) | set(Hs.entries)):
        if not (Hs.entry(*key) - H.entry(*key)).is_zero():
            return False, key
    return True, None


def symbol_compose(a: Laurent, b: Laurent) -> Laurent:
    """Symbol-level product A(zS).B(z), computed directly from symbols."""
    order = a.sig.order
    out: dict = {}
    for (ea, ka), ca in a.terms.items():
        m = ea[0]
        for (eb, kb), cb in b.terms.items():
            sb = tuple(shift_word(w, m, order) for w in kb)
            key = (ka[0] + sb[0], sb[1] + ka[1])
            e = m + eb[0]
            if order:
                e %= order
            add_into(out, ((e,), key), ca * cb)
    return Laurent._raw(a.sig, 2, 1, out)


def sigma_laurent_terms(terms: dict) -> dict:
    return {(e, k[-1:] + k[:-1]): c for (e, k), c in terms.items()}


__all__ = [
    "Laurent",
    "DiffOp",
    "compose",
    "compose_scalar",
    "adjoint",
    "adjoint_scalar",
    "apply_to_vector",
    "subst_shift",
    "is_skew_adjoint",
    "is_self_adjoint",
    "symbol_compose",
    "format_laurent",
    "sigma_terms",
]
