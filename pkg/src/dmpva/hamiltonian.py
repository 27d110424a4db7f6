"""Local functionals, Hamiltonian flows and the variational complex.

Forms of degree k are stored as follows: a 0-form is a ``LocalFunctional``,
a 1-form is a list of l polynomials, a 2-form maps ``(i, j)`` to a
one-variable Laurent tensor of arity 2, and a 3-form maps ``(i, j, k)`` to a
two-variable Laurent tensor of arity 3.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .bracket import BracketSpec, _as_poly, eval_bracket, triple_bracket
from .diffop import DiffOp, Laurent, is_self_adjoint
from .ncalg import EMPTY, NCPoly, Signature, Word, add_into, all_partials, shift_word
from .tensor import Tensor, mult, partial_at_terms, shift_terms, sigma_terms

# -- local functionals ------------------------------------------------------


def canonical_word(w: Word, order: int | None) -> Word:
    """Least rotation of ``w`` after shifting so that its least index is 0."""
    if not w:
        return w
    best = None
    for r in range(len(w)):
        rot = w[r:] + w[:r]
        if order:
            cands = [shift_word(rot, -k, order) for k in range(order)]
        else:
            cands = [shift_word(rot, -min(n for _, n in rot), None)]
        for c in cands:
            if best is None or c < best:
                best = c
    return best


class LocalFunctional:
    """A class in V / ([V,V] + (S-1)V), kept as its canonical representative."""

    __slots__ = ("sig", "poly")

    def __init__(self, f: NCPoly):
        out: dict = {}
        for w, c in f.terms.items():
            add_into(out, canonical_word(w, f.sig.order), c)
        self.sig = f.sig
        self.poly = NCPoly._raw(f.sig, out)

    def __add__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.poly + other.poly)

    def __neg__(self) -> "LocalFunctional":
        return LocalFunctional(-self.poly)

    def __sub__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.poly - other.poly)

    def scale(self, c) -> "LocalFunctional":
        return LocalFunctional(self.poly.scale(c))

    def __eq__(self, other) -> bool:
        if isinstance(other, NCPoly):
            other = LocalFunctional(other)
        if not isinstance(other, LocalFunctional):
            return NotImplemented
        return self.poly == other.poly

    def __hash__(self) -> int:
        return hash(self.poly)

    def __bool__(self) -> bool:
        return bool(self.poly)

    def __str__(self) -> str:
        return f"∫({self.poly})"

    def __repr__(self) -> str:
        return f"LocalFunctional({self.poly})"


def canonicalize(f) -> LocalFunctional:
    if isinstance(f, LocalFunctional):
        return f
    return LocalFunctional(f)


def _rep(f) -> NCPoly:
    return f.poly if isinstance(f, LocalFunctional) else f


# -- variational derivatives ----------------------------------------------


def variational_derivative(f, i: int) -> Tensor:
    """sum_n S^-n d f / d u_{i,n}."""
    f = _rep(f)
    order = f.sig.order
    out: dict = {}
    for (j, n), terms in all_partials(f).items():
        if j != i:
            continue
        for key, c in shift_terms(terms, -n, order).items():
            add_into(out, key, c)
    return Tensor._raw(f.sig, 2, out)


def _m_sigma(t: Tensor) -> NCPoly:
    return mult(Tensor._raw(t.sig, 2, sigma_terms(t.terms)))


def delta_vector(f) -> list[NCPoly]:
    """(mult (df/du_i)^sigma)_i, the gradient of a functional."""
    f = _rep(f)
    return [_m_sigma(variational_derivative(f, i)) for i in range(f.sig.nvars)]


# -- brackets on functionals and Hamiltonian flows -------------------------


def functional_bracket(spec: BracketSpec, f, g) -> LocalFunctional:
    """{∫f, ∫g} = ∫ mult {{f_l g}}|_{l=1}."""
    f, g = _rep(f), _rep(g)
    return LocalFunctional(mult(eval_bracket(spec, f, g).at_one()))


def functional_bracket_gradient(spec: BracketSpec, f, g) -> LocalFunctional:
    """Same bracket written through gradients: ∫ sum (dg)_j H_ji(S) *_1 (df)_i."""
    f, g = _rep(f), _rep(g)
    sig = spec.sig
    order = sig.order
    df, dg = delta_vector(f), delta_vector(g)
    out: dict = {}
    for (i, j), h in spec.pairs.items():
        # H_ji = {{u_i _l u_j}}
        if not df[i] or not dg[j]:
            continue
        for (e, (p, q)), c in h.terms.items():
            for w, d in df[i].terms.items():
                mid = p + shift_word(w, e[0], order) + q
                for v, b in dg[j].terms.items():
                    add_into(out, v + mid, c * d * b)
    return LocalFunctional(NCPoly._raw(sig, out))


@dataclass(frozen=True)
class EvolutionEquation:
    """Characteristics (P_i) of the evolutionary vector field du_i/dt = P_i."""

    sig: Signature
    P: tuple[NCPoly, ...]

    def __post_init__(self) -> None:
        if len(self.P) != self.sig.nvars:
            raise ValueError(f"need {self.sig.nvars} characteristics, got {len(self.P)}")

    def __getitem__(self, i: int) -> NCPoly:
        return self.P[i]

    def __str__(self) -> str:
        return "\n".join(f"d{self.sig.names[i]}/dt = {p}" for i, p in enumerate(self.P))


def evolution(sig: Signature, P: Sequence) -> EvolutionEquation:
    return EvolutionEquation(sig, tuple(_as_poly(sig, p) for p in P))


def hamiltonian_flow(spec: BracketSpec, h) -> EvolutionEquation:
    """du_i/dt = {∫h, u_i} = mult {{h_l u_i}}|_{l=1}."""
    h = _rep(h)
    sig = spec.sig
    return EvolutionEquation(sig, tuple(mult(eval_bracket(spec, h, NCPoly.gen(sig, i)).at_one()) for i in range(sig.nvars)))


def hamiltonian_flow_operator(spec: BracketSpec, h) -> EvolutionEquation:
    """du_i/dt = mult sum_j H_ij(S) . (dh/du_j)^sigma, with S acting on the right factor."""
    h = _rep(h)
    sig = spec.sig
    order = sig.order
    out = [dict() for _ in range(sig.nvars)]
    grads = [sigma_terms(variational_derivative(h, j).terms) for j in range(sig.nvars)]
    for (j, i), H in spec.pairs.items():
        # H_ij = {{u_j _l u_i}}
        for (e, (p, q)), c in H.terms.items():
            for (x1, x2), d in grads[j].items():
                add_into(out[i], p + shift_word(x1, e[0], order) + shift_word(x2, e[0], order) + q, c * d)
    return EvolutionEquation(sig, tuple(NCPoly._raw(sig, o) for o in out))


def apply_evolutionary(P: EvolutionEquation, f) -> NCPoly:
    """X_P(f) = sum mult((S^n P_i) *_1 df/du_{i,n}): substitute S^n P_i for u_{i,n}."""
    f = _as_poly(P.sig, f)
    order = P.sig.order
    out: dict = {}
    for (i, n), terms in all_partials(f).items():
        Pi = P.P[i]
        if not Pi:
            continue
        for (a, b), c in terms.items():
            for w, d in Pi.terms.items():
                add_into(out, a + shift_word(w, n, order) + b, c * d)
    return NCPoly._raw(P.sig, out)


def vf_commutator(P: EvolutionEquation, Q: EvolutionEquation) -> EvolutionEquation:
    """[P, Q]_i = X_P(Q_i) - X_Q(P_i)."""
    if P.sig != Q.sig:
        raise ValueError("signature mismatch")
    return EvolutionEquation(P.sig, tuple(apply_evolutionary(P, q) - apply_evolutionary(Q, p) for p, q in zip(P.P, Q.P)))


# -- multiplied brackets and the weak Jacobi defect ------------------------


def _mult_laurent(L: Laurent) -> Laurent:
    out: dict = {}
    for (e, key), c in L.terms.items():
        add_into(out, (e, (sum(key, EMPTY),)), c)
    return Laurent._raw(L.sig, 1, L.nvars, out)


def lambda_bracket(spec: BracketSpec, a, b) -> Laurent:
    """{a _l b} = mult {{a _l b}}, an arity-1 Laurent polynomial."""
    return _mult_laurent(eval_bracket(spec, a, b))


def m_triple(spec: BracketSpec, a, b, c) -> Laurent:
    """{a _l b _m c} = mult(mult (x) 1) {{a _l b _m c}}."""
    return _mult_laurent(triple_bracket(spec, a, b, c))


def _by_exp(L: Laurent) -> dict:
    out: dict = {}
    for (e, (w,)), c in L.terms.items():
        out.setdefault(e, {})[w] = c
    return out


def quasi_jacobi_lhs(spec: BracketSpec, a, b, c) -> Laurent:
    """{a _l {b _m c}} - {b _m {a _l c}} - {{a _l b}_{l m} c}."""
    sig = spec.sig
    order = sig.order
    out: dict = {}

    def put(e, w, v):
        if order:
            e = tuple(x % order for x in e)
        add_into(out, (e, (w,)), v)

    for (q,), poly in _by_exp(lambda_bracket(spec, b, c)).items():
        for (e, (w,)), v in lambda_bracket(spec, a, NCPoly._raw(sig, poly)).terms.items():
            put((e[0], q), w, v)
    for (p,), poly in _by_exp(lambda_bracket(spec, a, c)).items():
        for (e, (w,)), v in lambda_bracket(spec, b, NCPoly._raw(sig, poly)).terms.items():
            put((p, e[0]), w, -v)
    for (p,), poly in _by_exp(lambda_bracket(spec, a, b)).items():
        for (e, (w,)), v in lambda_bracket(spec, NCPoly._raw(sig, poly), c).terms.items():
            put((p + e[0], e[0]), w, -v)
    return Laurent._raw(sig, 1, 2, out)


def quasi_jacobi_rhs(spec: BracketSpec, a, b, c) -> Laurent:
    """{a _l b _m c} - {b _m a _l c}, both read in (lambda, mu)."""
    first = m_triple(spec, a, b, c)
    second = m_triple(spec, b, a, c)
    out = dict(first.terms)
    for ((p, q), key), v in second.terms.items():
        add_into(out, ((q, p), key), -v)
    return Laurent._raw(spec.sig, 1, 2, out)


def weak_jacobi_defect(spec: BracketSpec, f, h, threads: int = 1) -> list[NCPoly]:
    """D_{f,h}(u_i) = ({f _l h _m u_i} - {h _m f _l u_i})|_{l=m=1} for each generator."""
    sig = spec.sig
    f, h = _as_poly(sig, _rep(f)), _as_poly(sig, _rep(h))

    def one(i: int) -> NCPoly:
        u = NCPoly.gen(sig, i)
        return mult(triple_bracket(spec, f, h, u).at_one()) - mult(triple_bracket(spec, h, f, u).at_one())

    idx = list(range(sig.nvars))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, idx))
    return [one(i) for i in idx]


# -- variational complex ----------------------------------------------------


class FormError(ValueError):
    pass


@dataclass
class KForm:
    """A k-form of the reduced variational complex, validated on construction."""

    sig: Signature
    k: int
    data: object

    def __post_init__(self) -> None:
        if self.k not in (0, 1, 2, 3):
            raise FormError(f"unsupported degree {self.k}")
        if self.k == 0:
            self.data = canonicalize(self.data)
        elif self.k == 1:
            vec = list(self.data)
            if len(vec) != self.sig.nvars:
                raise FormError(f"1-form needs {self.sig.nvars} entries, got {len(vec)}")
            self.data = [_as_poly(self.sig, p) for p in vec]
        else:
            clean = {}
            for key, val in dict(self.data).items():
                if len(key) != self.k or any(not 0 <= i < self.sig.nvars for i in key):
                    raise FormError(f"bad index {key} for a {self.k}-form")
                if val.arity != self.k or val.nvars != self.k - 1:
                    raise FormError(f"entry {key} must have arity {self.k} in {self.k - 1} variables")
                if val:
                    clean[tuple(key)] = val
            self.data = clean
            bad = skewadjoint_defect(self)
            if bad is not None:
                raise FormError(f"entry {bad} violates the skewadjointness condition")

    def is_zero(self) -> bool:
        if self.k == 0:
            return not self.data
        if self.k == 1:
            return not any(self.data)
        return not self.data

    def entry(self, key: tuple[int, ...]) -> Laurent:
        zero = Laurent.zero(self.sig, self.k, self.k - 1)
        return self.data.get(tuple(key), zero)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KForm):
            return NotImplemented
        return self.k == other.k and self.sig == other.sig and self.data == other.data


def _reflect(k: int, L: Laurent, order: int | None) -> dict:
    """-(-1)^k |_{x=S} (A(l_2, ..., (l_1...l_{k-1} x)^-1))^sigma for a single entry."""
    sign = Fraction(-((-1) ** k))
    out: dict = {}
    for (e, key), c in L.terms.items():
        last = e[-1]
        # substitute (l_2..l_{k-1}, (l_1..l_{k-1} x)^-1) into (mu_1..mu_{k-1})
        ne = [-last] + [a - last for a in e[:-1]]
        if order:
            ne = [x % order for x in ne]
        nkey = tuple(shift_word(w, -last, order) for w in key)
        nkey = nkey[-1:] + nkey[:-1]
        add_into(out, (tuple(ne), nkey), sign * c)
    return out


def skewadjoint_defect(form: KForm):
    """First index tuple violating the cyclic skewadjointness condition, or None."""
    k = form.k
    if k < 2:
        return None
    order = form.sig.order
    n = form.sig.nvars
    from itertools import product

    for key in product(range(n), repeat=k):
        rot = key[1:] + key[:1]
        img = _reflect(k, form.entry(rot), order)
        if img != form.entry(key).terms:
            return key
    return None


def _laurent_from(sig: Signature, arity: int, nvars: int, terms: dict, scale: Fraction) -> Laurent:
    return Laurent._raw(sig, arity, nvars, {key: c * scale for key, c in terms.items() if c})


def de_rham_delta(form: KForm) -> KForm:
    """The variational differential on k-forms, k <= 2."""
    sig = form.sig
    order = sig.order
    nv = sig.nvars

    def red(e):
        return tuple(x % order for x in e) if order else tuple(e)

    if form.k == 0:
        return KForm(sig, 1, delta_vector(form.data))
    if form.k == 1:
        parts = [all_partials(F) for F in form.data]
        out: dict = {}
        for i in range(nv):
            for j in range(nv):
                acc: dict = {}
                for (g, n), terms in parts[j].items():
                    if g == i:
                        for key, c in terms.items():
                            add_into(acc, (red((n,)), key), c)
                for (g, n), terms in parts[i].items():
                    if g == j:
                        for key, c in sigma_terms(shift_terms(terms, -n, order)).items():
                            add_into(acc, (red((-n,)), key), -c)
                if acc:
                    out[(i, j)] = _laurent_from(sig, 2, 1, acc, Fraction(1, 2))
        return KForm(sig, 2, out)
    if form.k == 2:
        out = {}
        for i in range(nv):
            for j in range(nv):
                for k in range(nv):
                    acc: dict = {}
                    # (d/du_{i,n})_L A_jk(mu) lambda^n
                    for (e, key), c in form.entry((j, k)).terms.items():
                        for (g, n) in _letters(key[0]):
                            if g == i:
                                for nk, d in partial_at_terms({key: c}, 0, (g, n)).items():
                                    add_into(acc, (red((n, e[0])), nk), d)
                    # -(d/du_{j,n})_R A_ik(lambda) mu^n
                    for (e, key), c in form.entry((i, k)).terms.items():
                        for (g, n) in _letters(key[1]):
                            if g == j:
                                for nk, d in partial_at_terms({key: c}, 1, (g, n)).items():
                                    add_into(acc, (red((e[0], n)), nk), -d)
                    # (l m S)^-n ((d/du_{k,n})_L A_ij(lambda))^{sigma^2}
                    for (e, key), c in form.entry((i, j)).terms.items():
                        for (g, n) in _letters(key[0]):
                            if g == k:
                                img = partial_at_terms({key: c}, 0, (g, n))
                                img = sigma_terms(sigma_terms(shift_terms(img, -n, order)))
                                for nk, d in img.items():
                                    add_into(acc, (red((e[0] - n, -n)), nk), d)
                    if acc:
                        out[(i, j, k)] = _laurent_from(sig, 3, 2, acc, Fraction(2, 3))
        return KForm(sig, 3, out)
    raise FormError("the differential is implemented for k <= 2")


def _letters(w: Word) -> set:
    return set(w)


def frechet_derivative(F: Sequence) -> DiffOp:
    """D_F(l)_ij = sum_n dF_i/du_{j,n} l^n."""
    F = list(F)
    if not F:
        raise ValueError("empty vector")
    sig = _rep(F[0]).sig
    if len(F) != sig.nvars:
        raise ValueError(f"need {sig.nvars} entries, got {len(F)}")
    entries: dict = {}
    for i, Fi in enumerate(F):
        Fi = _as_poly(sig, Fi)
        acc: dict = {}
        for (j, n), terms in all_partials(Fi).items():
            for key, c in terms.items():
                add_into(acc.setdefault(j, {}), ((n,), key), c)
        for j, t in acc.items():
            if t:
                entries[(i, j)] = Laurent._raw(sig, 2, 1, t)
    return DiffOp(sig, sig.nvars, entries)


def is_closed_1form(F: Sequence) -> bool:
    return is_self_adjoint(frechet_derivative(F))[0]


def format_evolution(E: EvolutionEquation) -> str:
    return str(E)


__all__ = [
    "LocalFunctional",
    "canonicalize",
    "canonical_word",
    "variational_derivative",
    "delta_vector",
    "functional_bracket",
    "functional_bracket_gradient",
    "EvolutionEquation",
    "evolution",
    "hamiltonian_flow",
    "hamiltonian_flow_operator",
    "apply_evolutionary",
    "vf_commutator",
    "lambda_bracket",
    "m_triple",
    "quasi_jacobi_lhs",
    "quasi_jacobi_rhs",
    "weak_jacobi_defect",
    "KForm",
    "FormError",
    "skewadjoint_defect",
    "de_rham_delta",
    "frechet_derivative",
    "is_closed_1form",
]
