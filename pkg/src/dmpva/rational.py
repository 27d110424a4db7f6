"""Rational functions, one-sided series expansions and rational-type operators.

``TruncatedSeries`` follows one convention per direction. For ``+`` the
series lives in k((z)): coefficients below ``lo`` are zero and those up to
``hi`` are known exactly. For ``-`` it is the mirror image in k((z^-1)).
Arithmetic returns the largest window on which every coefficient is
determined by the inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence

from .bracket import BracketSpec, triple_bracket
from .diffop import Laurent
from .ncalg import NCPoly, Signature, add_into, shift_word
from .tensor import Tensor, bullet_terms, shift_terms, sigma_terms

INF = 10**9

# -- univariate polynomials over Q (coefficient lists, lowest degree first) --

Poly = tuple[Fraction, ...]


def _trim(p: Sequence) -> Poly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return _trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def _pscale(p: Poly, c) -> Poly:
    return _trim([a * c for a in p])


def _pdivmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    lead = q[-1]
    while len(r) >= len(q) and any(r):
        c = r[-1] / lead
        d = len(r) - len(q)
        quo[d] = c
        for i, b in enumerate(q):
            r[d + i] -= c * b
        r = list(_trim(r))
    return _trim(quo), _trim(r)


def _pgcd(p: Poly, q: Poly) -> Poly:
    while q:
        p, q = q, _pdivmod(p, q)[1]
    return _pscale(p, 1 / p[-1]) if p else ()


def _xpow(n: int) -> Poly:
    return tuple([Fraction(0)] * n + [Fraction(1)])


class RationalFn:
    """p(z)/q(z) with gcd(p, q) = 1 and q monic."""

    __slots__ = ("num", "den")

    def __init__(self, num: Sequence, den: Sequence = (1,)):
        p, q = _trim(num), _trim(den)
        if not q:
            raise ZeroDivisionError("zero denominator")
        if not p:
            self.num, self.den = (), (Fraction(1),)
            return
        g = _pgcd(p, q)
        if len(g) > 1:
            p, q = _pdivmod(p, g)[0], _pdivmod(q, g)[0]
        lead = q[-1]
        self.num, self.den = _pscale(p, 1 / lead), _pscale(q, 1 / lead)

    @classmethod
    def const(cls, c) -> "RationalFn":
        return cls((c,))

    @classmethod
    def monomial(cls, c, n: int) -> "RationalFn":
        """c z^n for any integer n."""
        if n >= 0:
            return cls(_pscale(_xpow(n), c))
        return cls((c,), _xpow(-n))

    def __add__(self, other) -> "RationalFn":
        other = _as_rat(other)
        return RationalFn(_padd(_pmul(self.num, other.den), _pmul(other.num, self.den)), _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self) -> "RationalFn":
        return RationalFn(_pscale(self.num, -1), self.den)

    def __sub__(self, other) -> "RationalFn":
        return self + (-_as_rat(other))

    def __rsub__(self, other) -> "RationalFn":
        return _as_rat(other) - self

    def __mul__(self, other) -> "RationalFn":
        other = _as_rat(other)
        return RationalFn(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFn":
        other = _as_rat(other)
        if not other.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFn(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __rtruediv__(self, other) -> "RationalFn":
        return _as_rat(other) / self

    def __pow__(self, n: int) -> "RationalFn":
        out = RationalFn.const(1)
        base = self if n >= 0 else RationalFn.const(1) / self
        for _ in range(abs(n)):
            out = out * base
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalFn.const(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def is_zero(self) -> bool:
        return not self.num

    def compose_power(self, k: int) -> "RationalFn":
        """r(z^k) for k != 0."""
        if k == 0:
            raise ValueError("k must be nonzero")
        return _subst_power(self.num, k) / _subst_power(self.den, k)

    def invert_variable(self) -> "RationalFn":
        """r(z^-1)."""
        return self.compose_power(-1)

    def __str__(self) -> str:
        n, d = _pfmt(self.num), _pfmt(self.den)
        return n if d == "1" else f"({n})/({d})"

    def __repr__(self) -> str:
        return f"RationalFn({self})"


def _subst_power(p: Poly, k: int) -> RationalFn:
    out = RationalFn.const(0)
    for i, c in enumerate(p):
        if c:
            out = out + RationalFn.monomial(c, i * k)
    return out


def _pfmt(p: Poly) -> str:
    from .ncalg import format_coeff

    if not p:
        return "0"
    parts = []
    for i, c in enumerate(p):
        if not c:
            continue
        mag = abs(c)
        mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
        body = format_coeff(mag) if not mono else (mono if mag == 1 else f"{format_coeff(mag)}*{mono}")
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


def _as_rat(x) -> RationalFn:
    if isinstance(x, RationalFn):
        return x
    if isinstance(x, (int, Fraction)):
        return RationalFn.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a rational function")


def z() -> RationalFn:
    return RationalFn.monomial(1, 1)


# -- truncated series --------------------------------------------------------


class WindowError(ValueError):
    pass


@dataclass
class TruncatedSeries:
    """Series in one or two variables known exactly on a window.

    ``coeffs`` maps exponent tuples to scalars (``Fraction``) or tensors.
    """

    nvars: int
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    coeffs: dict = field(default_factory=dict)
    direction: int = 1

    def __post_init__(self) -> None:
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if len(self.lo) != self.nvars or len(self.hi) != self.nvars:
            raise ValueError("window does not match the number of variables")
        self.coeffs = {e: c for e, c in self.coeffs.items() if c and self.in_window(e)}

    def in_window(self, e: tuple[int, ...]) -> bool:
        return all(l <= x <= h for l, x, h in zip(self.lo, e, self.hi))

    def coeff(self, e: tuple[int, ...]):
        """Coefficient at ``e``; raises if it is not determined."""
        e = tuple(e)
        if self.direction == 1:
            if any(x > h for x, h in zip(e, self.hi)):
                raise WindowError(f"exponent {e} beyond the known window")
        elif any(x < l for x, l in zip(e, self.lo)):
            raise WindowError(f"exponent {e} beyond the known window")
        return self.coeffs.get(e, 0)

    def known(self, e: tuple[int, ...]) -> bool:
        if self.direction == 1:
            return all(x <= h for x, h in zip(e, self.hi))
        return all(x >= l for x, l in zip(e, self.lo))

    def restrict(self, lo: tuple[int, ...], hi: tuple[int, ...]) -> dict:
        """Nonzero coefficients with exponents in the box [lo, hi] (all must be known)."""
        for corner in (hi if self.direction == 1 else lo,):
            if not self.known(corner):
                raise WindowError(f"box corner {corner} beyond the known window")
        return {e: c for e, c in self.coeffs.items() if all(l <= x <= h for l, x, h in zip(lo, e, hi))}

    def _check(self, other: "TruncatedSeries") -> None:
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        if self.direction != other.direction:
            raise ValueError("cannot combine expansions in opposite directions")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        if self.direction == 1:
            lo = tuple(map(min, self.lo, other.lo))
            hi = tuple(map(min, self.hi, other.hi))
        else:
            lo = tuple(map(max, self.lo, other.lo))
            hi = tuple(map(max, self.hi, other.hi))
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return TruncatedSeries(self.nvars, lo, hi, out, self.direction)

    def scale(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.lo, self.hi, {e: v * c for e, v in self.coeffs.items()}, self.direction)

    def __neg__(self) -> "TruncatedSeries":
        return self.scale(-1)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return series_product(self, other, lambda a, b: a * b)

    def valid_window(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.lo, self.hi


def _clip(x: int) -> int:
    return max(-INF, min(INF, x))


def product_window(a: TruncatedSeries, b: TruncatedSeries) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if a.direction == 1:
        lo = tuple(_clip(x + y) for x, y in zip(a.lo, b.lo))
        hi = tuple(_clip(min(ha + lb, hb + la)) for ha, hb, la, lb in zip(a.hi, b.hi, a.lo, b.lo))
    else:
        hi = tuple(_clip(x + y) for x, y in zip(a.hi, b.hi))
        lo = tuple(_clip(max(la + hb, lb + ha)) for ha, hb, la, lb in zip(a.hi, b.hi, a.lo, b.lo))
    return lo, hi


def series_product(a: TruncatedSeries, b: TruncatedSeries, mul: Callable) -> TruncatedSeries:
    """Cauchy product with a custom coefficient product ``mul(x_m, y_n, m)``-free form."""
    a._check(b)
    lo, hi = product_window(a, b)
    out: dict = {}
    for ea, ca in a.coeffs.items():
        for eb, cb in b.coeffs.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if all(l <= x <= h for l, x, h in zip(lo, e, hi)):
                v = mul(ca, cb)
                out[e] = out[e] + v if e in out else v
    return TruncatedSeries(a.nvars, lo, hi, out, a.direction)


def _inverse_series(q: Sequence[Fraction], n: int) -> list[Fraction]:
    """First n coefficients of 1/q for q with q[0] != 0."""
    inv = [Fraction(0)] * n
    if n == 0:
        return inv
    inv[0] = 1 / q[0]
    for m in range(1, n):
        s = Fraction(0)
        for i in range(1, min(m, len(q) - 1) + 1):
            s += q[i] * inv[m - i]
        inv[m] = -s / q[0]
    return inv


def iota_expand(r: RationalFn, direction: int = 1, window: tuple[int, int] = (-6, 6)) -> TruncatedSeries:
    """Laurent expansion of r at 0 (direction +1) or at infinity (-1), truncated to ``window``.

    For ``+`` the lower end is lowered to the valuation when needed so that
    no nonzero coefficient is dropped; ``-`` mirrors this at the top.
    """
    lo, hi = window
    if lo > hi:
        raise ValueError("empty window")
    if direction == -1:
        # r(z) at infinity is r(1/t) at t = 0 with t = 1/z
        s = iota_expand(r.invert_variable(), 1, (-hi, -lo))
        return TruncatedSeries(1, (-s.hi[0],), (-s.lo[0],), {(-e[0],): c for e, c in s.coeffs.items()}, -1)
    if direction != 1:
        raise ValueError("direction must be +1 or -1")
    if not r.num:
        return TruncatedSeries(1, (lo,), (hi,), {}, 1)
    M = next(i for i, c in enumerate(r.den) if c)
    V = next(i for i, c in enumerate(r.num) if c)
    val = V - M
    lo = min(lo, val)
    if hi < val:
        return TruncatedSeries(1, (lo,), (hi,), {}, 1)
    q = r.den[M:]
    p = r.num[V:]
    n = hi - val + 1
    inv = _inverse_series(q, n)
    coeffs: dict = {}
    for m in range(n):
        s = Fraction(0)
        for i in range(min(m, len(p) - 1) + 1):
            s += p[i] * inv[m - i]
        if s:
            coeffs[(val + m,)] = s
    return TruncatedSeries(1, (lo,), (hi,), coeffs, 1)


def valuation(r: RationalFn, direction: int = 1) -> int:
    if not r.num:
        return INF
    M = next(i for i, c in enumerate(r.den) if c)
    V = next(i for i, c in enumerate(r.num) if c)
    if direction == 1:
        return V - M
    return (len(r.num) - 1) - (len(r.den) - 1)


def embed(s: TruncatedSeries, mode: str) -> TruncatedSeries:
    """Two-variable series s(z), s(w) or s(zw) from a one-variable one."""
    if s.nvars != 1:
        raise ValueError("embed expects a one-variable series")
    lo, hi = s.lo[0], s.hi[0]
    far = INF if s.direction == 1 else -INF
    if mode == "z":
        return TruncatedSeries(2, (lo, 0 if s.direction == 1 else -INF), (hi, far if s.direction == 1 else 0), {(e[0], 0): c for e, c in s.coeffs.items()}, s.direction)
    if mode == "w":
        return TruncatedSeries(2, (0 if s.direction == 1 else -INF, lo), (far if s.direction == 1 else 0, hi), {(0, e[0]): c for e, c in s.coeffs.items()}, s.direction)
    if mode == "zw":
        return TruncatedSeries(2, (lo, lo), (hi, hi), {(e[0], e[0]): c for e, c in s.coeffs.items()}, s.direction)
    raise ValueError(f"unknown embedding {mode!r}")


def constant_series(c, nvars: int = 2, direction: int = 1) -> TruncatedSeries:
    if direction == 1:
        return TruncatedSeries(nvars, (0,) * nvars, (INF,) * nvars, {(0,) * nvars: Fraction(c)}, 1)
    return TruncatedSeries(nvars, (-INF,) * nvars, (0,) * nvars, {(0,) * nvars: Fraction(c)}, -1)


# -- the scalar functional equations -----------------------------------------


@dataclass
class FunctionalReport:
    ok: bool
    gamma: Fraction | None
    window: tuple[int, int]
    residuals: dict[str, dict] = field(default_factory=dict)
    valid: dict[str, tuple] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def _expand_until(build: Callable[[int], TruncatedSeries], window: tuple[int, int], cap: int = 200) -> TruncatedSeries:
    """Increase the expansion order until the result is known on window^2."""
    lo, hi = window
    pad = 0
    while True:
        res = build(hi + pad)
        if all(h >= hi for h in res.hi):
            return res
        pad = 2 * pad + 2
        if pad > cap:
            raise WindowError(f"could not reach window {window} within expansion cap {cap}")


def _series_of(x, H: int) -> TruncatedSeries:
    if isinstance(x, TruncatedSeries):
        return x
    return iota_expand(_as_rat(x), 1, (min(0, valuation(_as_rat(x))), H))


def _sym_cond(r, H: int) -> TruncatedSeries:
    """(r(z) + r(w)) r(zw) - r(z) r(w)."""
    s = _series_of(r, H)
    return (embed(s, "z") + embed(s, "w")) * embed(s, "zw") - embed(s, "z") * embed(s, "w")


def _mixed_cond(r, q, H: int) -> TruncatedSeries:
    """(r(z) + r(w)) q(zw) + q(z) q(w)."""
    s, t = _series_of(r, H), _series_of(q, H)
    return (embed(s, "z") + embed(s, "w")) * embed(t, "zw") + embed(t, "z") * embed(t, "w")


def _box(series: TruncatedSeries, window: tuple[int, int]) -> dict:
    lo, hi = window
    return series.restrict((lo, lo), (hi, hi))


def quadratic_identity_residual(R, gamma, window: tuple[int, int] = (-6, 6)) -> dict:
    """Nonzero coefficients of (R(z)+R(w))R(zw) - R(z)R(w) - gamma on window^2."""
    res = _expand_until(lambda H: _sym_cond(R, H) - constant_series(gamma), window)
    return _box(res, window)


def mixed_identity_residual(R, Q, window: tuple[int, int] = (-6, 6)) -> dict:
    """Nonzero coefficients of (R(z)+R(w))Q(zw) + Q(z)Q(w) on window^2."""
    res = _expand_until(lambda H: _mixed_cond(R, Q, H), window)
    return _box(res, window)


def check_functional_equations(a, b, c, window: tuple[int, int] = (-6, 6)) -> FunctionalReport:
    """The four two-variable identities tying a, b, c together, on window^2."""
    lo, hi = window
    first = _expand_until(lambda H: _sym_cond(b, H), window)
    gamma = first.coeffs.get((0, 0), Fraction(0))
    if not isinstance(gamma, Fraction):
        gamma = Fraction(gamma)
    residuals: dict = {}
    valid: dict = {}
    for name, build in (
        ("b-b", lambda H: _sym_cond(b, H) - constant_series(gamma)),
        ("c-c", lambda H: _sym_cond(c, H) - constant_series(gamma)),
        ("b-a", lambda H: _mixed_cond(b, a, H)),
        ("c-a", lambda H: _mixed_cond(c, a, H)),
    ):
        s = _expand_until(build, window)
        residuals[name] = _box(s, window)
        valid[name] = (s.lo, s.hi)
    ok = not any(residuals.values())
    return FunctionalReport(ok, gamma, window, residuals, valid)


# -- pseudodifference operators of rational type ------------------------------


def _tensor_series_const(t: Tensor) -> TruncatedSeries:
    return TruncatedSeries(1, (0,), (INF,), {(0,): t} if t else {}, 1)


def _rational_tensor_series(r: RationalFn, sig: Signature, H: int) -> TruncatedSeries:
    s = iota_expand(r, 1, (min(0, valuation(r)), H))
    one = Tensor.unit(sig, 2)
    return TruncatedSeries(1, s.lo, s.hi, {e: one.scale(c) for e, c in s.coeffs.items()}, 1)


def symbol_product(A: TruncatedSeries, B: TruncatedSeries) -> TruncatedSeries:
    """Symbol of the operator product: A(zS) . B(z) = sum a_m . S^m(b_n) z^(m+n)."""
    A._check(B)
    lo, hi = product_window(A, B)
    out: dict = {}
    for (m,), a in A.coeffs.items():
        order = a.sig.order
        for (n,), b in B.coeffs.items():
            e = m + n
            if not lo[0] <= e <= hi[0]:
                continue
            t = Tensor._raw(a.sig, 2, bullet_terms(a.terms, shift_terms(b.terms, m, order)))
            out[(e,)] = out[(e,)] + t if (e,) in out else t
    return TruncatedSeries(1, lo, hi, {e: t for e, t in out.items() if t}, 1)


Chain = tuple  # (Tensor, RationalFn, Tensor, ..., Tensor)


def _check_chain(ch: Chain) -> None:
    if not ch or len(ch) % 2 == 0:
        raise ValueError("a chain alternates tensors and rational functions and starts and ends with a tensor")
    for i, x in enumerate(ch):
        if i % 2 == 0 and not (isinstance(x, Tensor) and x.arity == 2):
            raise TypeError(f"chain slot {i} must be a V(x)V element")
        if i % 2 == 1 and not isinstance(x, RationalFn):
            raise TypeError(f"chain slot {i} must be a rational function")


class RationalPseudoOp:
    """Finite sum of c * f_1 r_1(S) . f_2 r_2(S) . ... . f_(n+1)."""

    def __init__(self, sig: Signature, chains: Sequence[tuple[object, Chain]] = ()):
        self.sig = sig
        self.chains: list[tuple[Fraction, Chain]] = []
        for c, ch in chains:
            ch = tuple(ch)
            _check_chain(ch)
            if Fraction(c):
                self.chains.append((Fraction(c), ch))

    @classmethod
    def unit(cls, sig: Signature) -> "RationalPseudoOp":
        return cls(sig, [(1, (Tensor.unit(sig, 2),))])

    def __add__(self, other: "RationalPseudoOp") -> "RationalPseudoOp":
        return RationalPseudoOp(self.sig, self.chains + other.chains)

    def scale(self, c) -> "RationalPseudoOp":
        return RationalPseudoOp(self.sig, [(c * d, ch) for d, ch in self.chains])

    def __neg__(self) -> "RationalPseudoOp":
        return self.scale(-1)

    def __sub__(self, other: "RationalPseudoOp") -> "RationalPseudoOp":
        return self + (-other)

    def symbol(self, hi: int) -> TruncatedSeries:
        """Truncated symbol, extended until it is known up to z^hi."""
        pad = 0
        while True:
            s = self._symbol(hi + pad)
            if s.hi[0] >= hi:
                return s
            pad = 2 * pad + 2
            if pad > 400:
                raise WindowError("symbol window does not grow")

    def _symbol(self, H: int) -> TruncatedSeries:
        total = TruncatedSeries(1, (0,), (INF,), {}, 1)
        for c, ch in self.chains:
            acc = _tensor_series_const(ch[0])
            for i in range(1, len(ch), 2):
                acc = symbol_product(acc, _rational_tensor_series(ch[i], self.sig, H))
                acc = symbol_product(acc, _tensor_series_const(ch[i + 1]))
            total = total + acc.scale(c)
        return total

    def __str__(self) -> str:
        from .tensor import format_tensor

        parts = []
        for c, ch in self.chains:
            body = " . ".join(f"[{format_tensor(x)}]" if i % 2 == 0 else f"ι+({x})(S)" for i, x in enumerate(ch))
            parts.append(body if c == 1 else f"{c}*{body}")
        return " + ".join(parts) if parts else "0"


def rat_compose_chains(A: RationalPseudoOp, B: RationalPseudoOp) -> RationalPseudoOp:
    """Structural product: concatenate chains, fusing the touching tensors."""
    out = []
    for c, ca in A.chains:
        for d, cb in B.chains:
            mid = Tensor._raw(A.sig, 2, bullet_terms(ca[-1].terms, cb[0].terms))
            out.append((c * d, ca[:-1] + (mid,) + cb[1:]))
    return RationalPseudoOp(A.sig, out)


def rat_compose(A: RationalPseudoOp, B: RationalPseudoOp, window: int = 6) -> TruncatedSeries:
    """Truncated symbol of A . B, known up to z^window."""
    return rat_compose_chains(A, B).symbol(window)


def rat_adjoint(A: RationalPseudoOp) -> RationalPseudoOp:
    """Reverse each chain, apply sigma to tensors and z -> 1/z to rational functions."""
    out = []
    for c, ch in A.chains:
        rev = []
        for i, x in enumerate(reversed(ch)):
            if i % 2 == 0:
                rev.append(Tensor._raw(A.sig, 2, sigma_terms(x.terms)))
            else:
                rev.append(x.invert_variable())
        out.append((c, tuple(rev)))
    return RationalPseudoOp(A.sig, out)


def symbols_equal(A: RationalPseudoOp, B: RationalPseudoOp, window: int = 6) -> bool:
    sa, sb = A.symbol(window), B.symbol(window)
    lo = min(sa.lo[0], sb.lo[0])
    return (sa - sb).restrict((lo,), (window,)) == {}


def build_nib(alpha, beta, k: int, p: int, sig: Signature | None = None) -> RationalPseudoOp:
    """The four-chain operator with a(z) = alpha z^p/(1-z^k), b = c = beta(1+z^k)/(1-z^k)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    alpha, beta = Fraction(alpha), Fraction(beta)
    if alpha * (2 * beta + alpha) != 0:
        warnings.warn(f"alpha(2 beta + alpha) = {alpha * (2 * beta + alpha)} != 0: no Jacobi identity expected", stacklevel=2)
    sig = sig or Signature(("u",))
    u = NCPoly.gen(sig, 0)
    one = NCPoly.const(sig)
    r_u = Tensor.pure(one, u)
    l_u = Tensor.pure(u, one)
    zk = RationalFn.monomial(1, k)
    a = RationalFn.monomial(alpha, p) / (1 - zk)
    b = beta * (1 + zk) / (1 - zk)
    return RationalPseudoOp(sig, [
        (1, (r_u, a, r_u)),
        (1, (r_u, b, l_u)),
        (1, (l_u, b, r_u)),
        (-1, (l_u, a.invert_variable(), l_u)),
    ])


def nib_functions(alpha, beta, k: int, p: int) -> tuple[RationalFn, RationalFn, RationalFn]:
    zk = RationalFn.monomial(1, k)
    a = RationalFn.monomial(Fraction(alpha), p) / (1 - zk)
    b = Fraction(beta) * (1 + zk) / (1 - zk)
    return a, b, b


# -- series-valued generator brackets ---------------------------------------


class SeriesBracket:
    """Generator brackets {{u_i _l u_j}} given as series.

    ``kind`` is ``"rational"`` (each entry a ``RationalPseudoOp`` symbol in
    k((l))) or ``"bilateral"`` (each entry a coefficient function n -> Tensor
    on all of Z).
    """

    def __init__(self, sig: Signature, pairs: Mapping[tuple[int, int], object], kind: str = "rational"):
        if kind not in ("rational", "bilateral"):
            raise ValueError("kind must be 'rational' or 'bilateral'")
        self.sig = sig
        self.pairs = dict(pairs)
        self.kind = kind

    def truncate(self, lo: int, hi: int) -> tuple[BracketSpec, dict]:
        """Local spec holding every coefficient with exponent in [lo, hi], and the raw coefficients."""
        pairs = {}
        raw: dict = {}
        for key, val in self.pairs.items():
            coeffs = {}
            if self.kind == "rational":
                s = val.symbol(hi)
                for (n,), t in s.coeffs.items():
                    if n <= hi:
                        coeffs[n] = t
            else:
                for n in range(lo, hi + 1):
                    t = val(n)
                    if t:
                        coeffs[n] = t
            raw[key] = coeffs
            terms = {}
            for n, t in coeffs.items():
                for k2, c in t.terms.items():
                    terms[((n,), k2)] = c
            pairs[key] = Laurent._raw(self.sig, 2, 1, terms)
        return BracketSpec(self.sig, pairs), raw


@dataclass
class TruncatedBracketReport:
    rational_skew: bool | None
    nonlocal_skew: bool
    jacobi: bool
    window: tuple[int, int]
    truncation: tuple[int | None, int]
    skew_witness: object = None
    jacobi_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        skew = self.rational_skew if self.rational_skew is not None else self.nonlocal_skew
        return bool(skew and self.jacobi)


def _letter_shifts(raw: dict) -> dict[int, tuple[int, int]]:
    out: dict[int, tuple[int, int]] = {}
    for coeffs in raw.values():
        for n, t in coeffs.items():
            shifts = [s for key in t.terms for w in key for _, s in w]
            if not shifts:
                continue
            lo, hi = min(shifts), max(shifts)
            if n in out:
                lo, hi = min(lo, out[n][0]), max(hi, out[n][1])
            out[n] = (lo, hi)
    return out


def _exact(P: int, Q: int, L: int | None, H: int, shifts: dict) -> bool:
    """Whether every Jacobi term at l^P m^Q is unaffected by truncation to [L, H]."""

    def known(n: int) -> bool:
        return n <= H and (L is None or n >= L)

    def inside(x: int, lo_off: int, hi_off: int) -> bool:
        return x <= H + hi_off and (L is None or x >= L + lo_off)

    if not known(Q) or not known(P) or not known(P - Q):
        return False
    if Q in shifts:
        smin, smax = shifts[Q]
        if not inside(P, smax, smin):
            return False
    if P in shifts:
        smin, smax = shifts[P]
        if not inside(Q, smax, smin):
            return False
    n = P - Q
    if n in shifts:
        smin, smax = shifts[n]
        if not inside(Q, -smin, -smax):
            return False
    return True


def _atoms(sb: SeriesBracket) -> list:
    """Split rational generator brackets into (i, j, c, f1, r, f2) with shift-free f1, f2."""
    out = []
    for (i, j), op in sb.pairs.items():
        for c, ch in op.chains:
            if len(ch) == 1:
                ch = (ch[0], RationalFn.const(1), Tensor.unit(sb.sig, 2))
            if len(ch) != 3:
                raise NotImplementedError("generator Jacobi is implemented for chains with a single rational factor")
            for f in (ch[0], ch[2]):
                if any(s for key in f.terms for w in key for _, s in w):
                    raise NotImplementedError("generator Jacobi needs shift-free tensor factors in each chain")
            out.append((i, j, c, ch[0], ch[1], ch[2]))
    return out


def _tag(terms: dict, nv: int) -> dict:
    return {tuple(tuple((v + nv, s) for v, s in w) for w in key): c for key, c in terms.items()}


def _untag_word(w, nv: int):
    return tuple((v % nv, s) for v, s in w)


def _rational_jacobi(sb: SeriesBracket, lo: int, hi: int) -> tuple[list, tuple[int, int]]:
    """Generator Jacobi defect of a rational bracket on the box [lo, hi]^2.

    In the term {{ {{a _l b}}_{l m} c }}_L a letter S^n(.) coming from the
    right factor of a chain contributes r evaluated at (mu x)^(-1); as a
    rational function this is expanded in positive powers of mu, which
    amounts to reading r through its expansion at infinity.
    """
    sig = sb.sig
    if sig.order:
        raise ValueError("rational brackets need an infinite-order shift")
    nv = sig.nvars
    atoms = _atoms(sb)
    H = hi + max(0, hi - lo, -lo)
    Lm = lo - hi
    ext = Signature(sig.names + tuple(f"{n}_tag{len(sig.names)}" for n in sig.names))

    plus_terms: dict = {}
    first_hit: dict = {}
    second_hit: dict = {}
    for i, j, c, f1, r, f2 in atoms:
        sp = iota_expand(r, 1, (min(lo, valuation(r)), H))
        sm = iota_expand(r, -1, (Lm, max(hi, valuation(r, -1))))
        t1, t2 = f1.terms, f2.terms
        for (n,), rn in sp.coeffs.items():
            body = bullet_terms(t1, shift_terms(t2, n, None))
            for key, v in body.items():
                add_into(plus_terms.setdefault((i, j), {}), ((n,), key), c * rn * v)
            for key, v in bullet_terms(t1, shift_terms(_tag(t2, nv), n, None)).items():
                add_into(first_hit.setdefault((i, j), {}), (n, key), c * rn * v)
        for (n,), rn in sm.coeffs.items():
            for key, v in bullet_terms(_tag(t1, nv), shift_terms(t2, n, None)).items():
                add_into(second_hit.setdefault((i, j), {}), (n, key), c * rn * v)
    spec = BracketSpec(sig, {k: Laurent._raw(sig, 2, 1, v) for k, v in plus_terms.items()})
    spec_ext = BracketSpec(ext, {k: Laurent._raw(ext, 2, 1, v) for k, v in plus_terms.items()})

    failures = []
    for a, b, cidx in product(range(nv), repeat=3):
        out: dict = {}
        ga, gb, gc = ({((x, 0),): 1} for x in (a, b, cidx))
        for (p, (b1, b2)), cb in spec.bracket_terms(gb, gc).items():
            for (q, (x1, x2)), d in spec.bracket_terms(ga, {b1: 1}).items():
                add_into(out, ((q, p), (x1, x2, b2)), cb * d)
        for (p, (c1, c2)), cc in spec.bracket_terms(ga, gc).items():
            for (q, (y1, y2)), d in spec.bracket_terms(gb, {c2: 1}).items():
                add_into(out, ((p, q), (c1, y1, y2)), -cc * d)
        for data in (first_hit.get((a, b), {}), second_hit.get((a, b), {})):
            for (n, (a1, a2)), ca in data.items():
                for (k, (d1, d2)), d in spec_ext.bracket_terms({a1: 1}, gc).items():
                    key = (_untag_word(d1, nv), _untag_word(shift_word(a2, k, None), nv), _untag_word(d2, nv))
                    add_into(out, ((n + k, k), key), -ca * d)
        bad = {k: v for k, v in out.items() if lo <= k[0][0] <= hi and lo <= k[0][1] <= hi}
        if bad:
            failures.append(((a, b, cidx), bad))
    return failures, (Lm, H)


def check_truncated_bracket(sb: SeriesBracket, window: tuple[int, int] = (-6, 6), cap: int = 60) -> TruncatedBracketReport:
    """Skewsymmetry (both readings) and generator Jacobi on window^2."""
    lo, hi = window
    if lo > hi:
        raise ValueError("empty window")
    sig = sb.sig
    order = sig.order
    nv = sig.nvars

    # skewsymmetry read on bilateral series: c^{ji}_n = -S^n(c^{ij}_{-n})^sigma
    span = max(abs(lo), abs(hi))
    _, raw = sb.truncate(-span, span)
    nonlocal_ok = True
    witness = None
    for i, j in product(range(nv), repeat=2):
        cij, cji = raw.get((i, j), {}), raw.get((j, i), {})
        for n in range(-span, span + 1):
            lhs = cji.get(n)
            lhs = lhs.terms if lhs is not None else {}
            src = cij.get(-n)
            rhs = {}
            if src is not None:
                rhs = {k2: -c for k2, c in sigma_terms(shift_terms(src.terms, n, order)).items()}
            if lhs != rhs:
                nonlocal_ok = False
                witness = witness or ("nonlocal", (i, j), n)
                break

    rational_ok = None
    if sb.kind == "rational":
        rational_ok = True
        for i, j in product(range(nv), repeat=2):
            A = sb.pairs.get((i, j), RationalPseudoOp(sig))
            B = sb.pairs.get((j, i), RationalPseudoOp(sig))
            if not symbols_equal(A, -rat_adjoint(B), span):
                rational_ok = False
                witness = witness or ("rational", (i, j))
        failures, trunc = _rational_jacobi(sb, lo, hi)
        return TruncatedBracketReport(rational_ok, nonlocal_ok, not failures, window, trunc, witness, failures)

    # bilateral data: widen the truncation until every term on the window is exact
    pad = 2
    while True:
        L, H = lo - pad, hi + pad
        spec, raw = sb.truncate(L, H)
        shifts = _letter_shifts(raw)
        if all(_exact(P, Q, L, H, shifts) for P, Q in product(range(lo, hi + 1), repeat=2)):
            break
        pad = 2 * pad
        if pad > cap:
            raise WindowError(f"window {window} is not reachable within truncation cap {cap}")
    failures = []
    gens = [NCPoly.gen(sig, i) for i in range(nv)]
    for a, b, c in product(range(nv), repeat=3):
        T = triple_bracket(spec, gens[a], gens[b], gens[c])
        bad = {k: v for k, v in T.terms.items() if lo <= k[0][0] <= hi and lo <= k[0][1] <= hi}
        if bad:
            failures.append(((a, b, c), bad))
    return TruncatedBracketReport(None, nonlocal_ok, not failures, window, (L, H), witness, failures)


def rational_generator_bracket(sig: Signature, ops: Mapping[tuple[int, int], RationalPseudoOp]) -> SeriesBracket:
    return SeriesBracket(sig, ops, "rational")


def bilateral_generator_bracket(sig: Signature, coeff: Mapping[tuple[int, int], Callable[[int], Tensor]]) -> SeriesBracket:
    return SeriesBracket(sig, coeff, "bilateral")


# -- text input ----------------------------------------------------------------


def parse_rational(text: str, var: str = "z") -> RationalFn:
    """Read expressions such as ``(1+z)/(1-z)``, ``3*z^-2`` or ``1/2``."""
    import re

    tokens = [(m.group(), m.start()) for m in re.finditer(r"\d+|[A-Za-z_]\w*|[-+*/^()]|\S", text)]
    pos = 0

    def peek() -> str | None:
        return tokens[pos][0] if pos < len(tokens) else None

    def fail(msg: str) -> ValueError:
        at = tokens[pos][1] if pos < len(tokens) else len(text)
        return ValueError(f"{msg} at column {at + 1} in {text!r}")

    def take(tok: str | None = None) -> str:
        nonlocal pos
        t = peek()
        if t is None or (tok is not None and t != tok):
            raise fail(f"expected {tok or 'a token'}")
        pos += 1
        return t

    def expr() -> RationalFn:
        out = term()
        while peek() in ("+", "-"):
            out = out + term() if take() == "+" else out - term()
        return out

    def term() -> RationalFn:
        out = unary()
        while peek() in ("*", "/"):
            out = out * unary() if take() == "*" else out / unary()
        return out

    def unary() -> RationalFn:
        if peek() == "-":
            take()
            return -unary()
        if peek() == "+":
            take()
            return unary()
        return power()

    def power() -> RationalFn:
        base = atom()
        if peek() == "^":
            take()
            sign = 1
            if peek() == "-":
                take()
                sign = -1
            t = take()
            if not t.isdigit():
                raise fail("expected an integer exponent")
            base = base ** (sign * int(t))
        return base

    def atom() -> RationalFn:
        t = peek()
        if t is None:
            raise fail("unexpected end of input")
        if t.isdigit():
            take()
            return RationalFn.const(int(t))
        if t == var:
            take()
            return RationalFn.monomial(1, 1)
        if t == "(":
            take()
            out = expr()
            take(")")
            return out
        raise fail(f"unexpected {t!r}")

    if not text.strip():
        raise ValueError("empty rational expression")
    out = expr()
    if pos != len(tokens):
        raise fail("trailing input")
    return out


__all__ = [
    "RationalFn",
    "TruncatedSeries",
    "WindowError",
    "iota_expand",
    "valuation",
    "embed",
    "constant_series",
    "series_product",
    "product_window",
    "quadratic_identity_residual",
    "mixed_identity_residual",
    "check_functional_equations",
    "FunctionalReport",
    "RationalPseudoOp",
    "symbol_product",
    "rat_compose",
    "rat_compose_chains",
    "rat_adjoint",
    "symbols_equal",
    "build_nib",
    "nib_functions",
    "SeriesBracket",
    "rational_generator_bracket",
    "bilateral_generator_bracket",
    "check_truncated_bracket",
    "TruncatedBracketReport",
    "parse_rational",
    "z",
]
