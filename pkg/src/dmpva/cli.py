"""Spec documents, reports and the ``dmpva`` command line."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Sequence

from .bracket import (
    BracketSpec,
    check_class_r1,
    check_class_r2,
    check_jacobi,
    check_skew,
    class1_bracket,
    class2_bracket,
    eval_bracket,
    triple_bracket,
)
from .diffop import Laurent, format_monomial, is_self_adjoint
from .hamiltonian import (
    KForm,
    canonicalize,
    de_rham_delta,
    frechet_derivative,
    functional_bracket,
    functional_bracket_gradient,
    hamiltonian_flow,
    hamiltonian_flow_operator,
)
from .ncalg import NCPoly, ParseError, Signature, add_into, format_coeff
from .rational import (
    RationalFn,
    RationalPseudoOp,
    SeriesBracket,
    WindowError,
    build_nib,
    check_functional_equations,
    check_truncated_bracket,
    iota_expand,
    nib_functions,
    parse_rational,
    rational_generator_bracket,
)
from .rep import check_commutative_mpva, format_cgen, format_comm, induce_bracket
from .tensor import Tensor, format_tensor

RationalSpec = SeriesBracket

_TOP_KEYS = {"algebra", "bracket", "rational", "description"}


class SpecError(ValueError):
    """A spec document problem, located by a JSON path or a line/column."""

    def __init__(self, msg: str, path: str = "$", line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}" if line is not None else path
        super().__init__(f"{where}: {msg}")
        self.path, self.line, self.column = path, line, column


# -- parsing -------------------------------------------------------------------


def _coeff(x, path: str) -> Fraction:
    if not isinstance(x, str):
        raise SpecError("coefficients are strings such as \"-3/2\"", path)
    try:
        return Fraction(x.strip())
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"bad rational {x!r}", path) from None


def _int(x, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SpecError("expected an integer", path)
    return x


def _word(sig: Signature, w, path: str) -> tuple:
    if not isinstance(w, list):
        raise SpecError("a word is a list of [variable, shift] pairs", path)
    out = []
    for k, letter in enumerate(w):
        p = f"{path}[{k}]"
        if not (isinstance(letter, list) and len(letter) == 2):
            raise SpecError("a letter is [variable, shift]", p)
        name, shift = letter
        if name not in sig.names:
            raise SpecError(f"unknown variable {name!r}", f"{p}[0]")
        shift = _int(shift, f"{p}[1]")
        if sig.order and not 0 <= shift < sig.order:
            raise SpecError(f"shift {shift} outside [0, {sig.order}) for a shift of order {sig.order}", f"{p}[1]")
        out.append((sig.index(name), shift))
    return tuple(out)


def _tensor(sig: Signature, rows, path: str) -> Tensor:
    if not isinstance(rows, list):
        raise SpecError("a tensor is a list of [coefficient, word-left, word-right] triples", path)
    terms: dict = {}
    for k, row in enumerate(rows):
        p = f"{path}[{k}]"
        if not (isinstance(row, list) and len(row) == 3):
            raise SpecError("expected [coefficient, word-left, word-right]", p)
        c = _coeff(row[0], f"{p}[0]")
        add_into(terms, (_word(sig, row[1], f"{p}[1]"), _word(sig, row[2], f"{p}[2]")), c)
    return Tensor(sig, 2, terms)


def _pair(sig: Signature, key: str, path: str) -> tuple[int, int]:
    parts = key.split(",")
    if len(parts) != 2:
        raise SpecError("pair keys look like \"u,v\"", path)
    idx = []
    for name in parts:
        name = name.strip()
        if name not in sig.names:
            raise SpecError(f"unknown variable {name!r}", path)
        idx.append(sig.index(name))
    return idx[0], idx[1]


def _check_keys(obj: dict, allowed: set, path: str) -> None:
    for k in sorted(obj):
        if k not in allowed:
            raise SpecError(f"unknown key {k!r}", f"{path}.{k}")


def _algebra(doc: dict) -> Signature:
    alg = doc.get("algebra")
    if not isinstance(alg, dict):
        raise SpecError("missing \"algebra\" object", "$.algebra")
    _check_keys(alg, {"variables", "order"}, "$.algebra")
    names = alg.get("variables")
    if not (isinstance(names, list) and names and all(isinstance(n, str) for n in names)):
        raise SpecError("\"variables\" is a nonempty list of names", "$.algebra.variables")
    order = alg.get("order", "infinite")
    if order == "infinite":
        order = None
    elif isinstance(order, bool) or not isinstance(order, int) or order < 1:
        raise SpecError("\"order\" is \"infinite\" or a positive integer", "$.algebra.order")
    try:
        return Signature(tuple(names), order)
    except ValueError as e:
        raise SpecError(str(e), "$.algebra.variables") from None


def _local_pairs(sig: Signature, doc: dict) -> dict[tuple[int, int], Laurent]:
    br = doc.get("bracket", {})
    if not isinstance(br, dict):
        raise SpecError("\"bracket\" maps \"ui,uj\" to term lists", "$.bracket")
    pairs: dict = {}
    for key in sorted(br):
        path = f"$.bracket[{json.dumps(key)}]"
        ij = _pair(sig, key, path)
        terms_list = br[key]
        if not isinstance(terms_list, list):
            raise SpecError("expected a list of {\"lambda\", \"tensor\"} terms", path)
        acc = pairs.get(ij, Laurent.zero(sig))
        for k, term in enumerate(terms_list):
            p = f"{path}[{k}]"
            if not isinstance(term, dict):
                raise SpecError("expected {\"lambda\": n, \"tensor\": [...]}", p)
            _check_keys(term, {"lambda", "tensor"}, p)
            if "lambda" not in term or "tensor" not in term:
                raise SpecError("each term needs \"lambda\" and \"tensor\"", p)
            n = _int(term["lambda"], f"{p}.lambda")
            if sig.order and not 0 <= n < sig.order:
                raise SpecError(f"exponent {n} outside [0, {sig.order})", f"{p}.lambda")
            acc = acc + Laurent.monomial(_tensor(sig, term["tensor"], f"{p}.tensor"), (n,))
        pairs[ij] = acc
    return pairs


def _rational_pairs(sig: Signature, doc: dict) -> dict[tuple[int, int], RationalPseudoOp]:
    rat = doc["rational"]
    if not isinstance(rat, dict):
        raise SpecError("\"rational\" maps \"ui,uj\" to chain lists", "$.rational")
    out: dict = {}
    for key in sorted(rat):
        path = f"$.rational[{json.dumps(key)}]"
        ij = _pair(sig, key, path)
        items = rat[key]
        if not isinstance(items, list):
            raise SpecError("expected a list of {\"coeff\", \"chain\"} objects", path)
        chains = []
        for k, item in enumerate(items):
            p = f"{path}[{k}]"
            if not isinstance(item, dict):
                raise SpecError("expected {\"coeff\": ..., \"chain\": [...]}", p)
            _check_keys(item, {"coeff", "chain"}, p)
            c = _coeff(item.get("coeff", "1"), f"{p}.coeff")
            ch = item.get("chain")
            if not isinstance(ch, list) or len(ch) % 2 == 0:
                raise SpecError("a chain alternates tensors and rational functions, odd length", f"{p}.chain")
            parsed = []
            for m, link in enumerate(ch):
                q = f"{p}.chain[{m}]"
                if not isinstance(link, dict):
                    raise SpecError("chain links are objects", q)
                if m % 2 == 0:
                    _check_keys(link, {"tensor"}, q)
                    parsed.append(_tensor(sig, link.get("tensor"), f"{q}.tensor"))
                else:
                    _check_keys(link, {"num", "den"}, q)
                    num = [_coeff(x, f"{q}.num[{t}]") for t, x in enumerate(link.get("num", []))]
                    den = [_coeff(x, f"{q}.den[{t}]") for t, x in enumerate(link.get("den", ["1"]))]
                    try:
                        parsed.append(RationalFn(num, den))
                    except ZeroDivisionError:
                        raise SpecError("zero denominator", f"{q}.den") from None
            chains.append((c, tuple(parsed)))
        out[ij] = RationalPseudoOp(sig, chains)
    return out


def parse_spec(data: bytes | str) -> BracketSpec | RationalSpec:
    """Read a spec document. A ``rational`` section turns the result into a ``RationalSpec``."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise SpecError(f"not UTF-8 ({e.reason})") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SpecError(e.msg, line=e.lineno, column=e.colno) from None
    if not isinstance(doc, dict):
        raise SpecError("the document must be a single JSON object")
    _check_keys(doc, _TOP_KEYS, "$")
    if "description" in doc and not isinstance(doc["description"], str):
        raise SpecError("\"description\" is a string", "$.description")
    sig = _algebra(doc)
    local = _local_pairs(sig, doc)
    if "rational" not in doc:
        return BracketSpec(sig, local)
    if sig.order:
        raise SpecError("rational brackets need an infinite-order shift", "$.algebra.order")
    ops = _rational_pairs(sig, doc)
    one = Tensor.unit(sig)
    for ij, lp in local.items():
        extra = [(1, (t, RationalFn.monomial(1, e[0]), one)) for e, t in lp.coeffs()]
        ops[ij] = ops.get(ij, RationalPseudoOp(sig)) + RationalPseudoOp(sig, extra)
    return rational_generator_bracket(sig, ops)


def load_spec(path: str | Path) -> BracketSpec | RationalSpec:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e.strerror}") from None
    return parse_spec(data)


# -- serialization -----------------------------------------------------------


def _word_json(sig: Signature, w) -> list:
    return [[sig.names[v], s] for v, s in w]


def _tensor_json(sig: Signature, t: Tensor) -> list:
    rows = [[_frac(c), _word_json(sig, k[0]), _word_json(sig, k[1])] for k, c in t.terms.items()]
    return sorted(rows, key=lambda r: json.dumps(r[1:]) + r[0])


def _frac(c) -> str:
    return str(Fraction(c))


def _algebra_json(sig: Signature) -> dict:
    return {"variables": list(sig.names), "order": sig.order if sig.order else "infinite"}


def spec_to_dict(spec: BracketSpec | RationalSpec) -> dict:
    sig = spec.sig
    doc: dict = {"algebra": _algebra_json(sig), "bracket": {}}
    if isinstance(spec, BracketSpec):
        for (i, j) in sorted(spec.pairs):
            key = f"{sig.names[i]},{sig.names[j]}"
            doc["bracket"][key] = [{"lambda": e[0], "tensor": _tensor_json(sig, t)} for e, t in spec.pairs[(i, j)].coeffs()]
        return doc
    doc["rational"] = {}
    for (i, j) in sorted(spec.pairs):
        key = f"{sig.names[i]},{sig.names[j]}"
        items = []
        for c, ch in spec.pairs[(i, j)].chains:
            links = []
            for m, x in enumerate(ch):
                if m % 2 == 0:
                    links.append({"tensor": _tensor_json(sig, x)})
                else:
                    links.append({"num": [_frac(a) for a in x.num], "den": [_frac(a) for a in x.den]})
            items.append({"coeff": _frac(c), "chain": links})
        doc["rational"][key] = items
    return doc


def serialize_spec(spec: BracketSpec | RationalSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- reports ---------------------------------------------------------------------


@dataclass
class Check:
    name: str
    ok: bool
    details: list[str] = field(default_factory=list)


@dataclass
class Report:
    command: str
    sections: list[tuple[str, list[str]]] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def section(self, title: str, lines: Sequence[str]) -> None:
        self.sections.append((title, list(lines)))

    def check(self, name: str, ok: bool, details: Sequence[str] = ()) -> None:
        self.checks.append(Check(name, bool(ok), list(details)))

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "sections": [{"title": t, "lines": lines} for t, lines in self.sections],
            "checks": [{"name": c.name, "status": "PASS" if c.ok else "FAIL", "details": c.details} for c in self.checks],
            "status": "PASS" if self.ok else "FAIL",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        out = [f"# {self.command}"]
        for title, lines in self.sections:
            out.append(f"{title}:")
            out.extend(f"  {x}" for x in lines)
        for c in self.checks:
            out.append(f"{'PASS' if c.ok else 'FAIL'} {c.name}")
            out.extend(f"  {x}" for x in c.details)
        if self.checks:
            out.append(f"status: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(out) + "\n"


def report_from_json(text: str) -> Report:
    d = json.loads(text)
    r = Report(d["command"])
    for s in d["sections"]:
        r.section(s["title"], s["lines"])
    for c in d["checks"]:
        r.check(c["name"], c["status"] == "PASS", c["details"])
    return r


def report_from_text(text: str) -> Report:
    """Inverse of ``Report.to_text`` (used to confirm both formats carry the same data)."""
    lines = text.rstrip("\n").split("\n")
    r = Report(lines[0][2:])
    cur: list | None = None
    for line in lines[1:]:
        if line.startswith("  "):
            cur.append(line[2:])
        elif line.startswith(("PASS ", "FAIL ")):
            r.check(line[5:], line.startswith("PASS"))
            cur = r.checks[-1].details
        elif line.startswith("status: "):
            cur = None
        else:
            r.section(line[:-1], [])
            cur = r.sections[-1][1]
    return r


# -- formatting helpers ------------------------------------------------------------


def laurent_lines(p: Laurent) -> list[str]:
    if not p.terms:
        return ["0"]
    return [f"{format_monomial(e) or '1'}: {format_tensor(t)}" for e, t in p.coeffs()]


def _pair_name(sig: Signature, i: int, j: int) -> str:
    return f"{{{{{sig.names[i]} λ {sig.names[j]}}}}}"


# -- commands ----------------------------------------------------------------------


def _need_local(spec, what: str) -> BracketSpec:
    if not isinstance(spec, BracketSpec):
        raise SpecError(f"{what} needs a local (polynomial) bracket; use `rational check` for rational specs")
    return spec


def _poly(sig: Signature, text: str, flag: str) -> NCPoly:
    try:
        return NCPoly.parse(sig, text)
    except ParseError as e:
        raise SpecError(f"{flag}: {e}") from None


def cmd_check(args) -> Report:
    spec = load_spec(args.spec)
    want_skew = args.skew or not args.jacobi
    want_jac = args.jacobi or not args.skew
    r = Report("check")
    if isinstance(spec, SeriesBracket):
        _series_checks(r, spec, args.window, want_skew, want_jac)
        return r
    sig = spec.sig
    if want_skew:
        ok, where = check_skew(spec)
        r.check("skew", ok, [] if ok else [f"first failing operator entry H[{where[0]},{where[1]}]"])
    if want_jac:
        rep = check_jacobi(spec, args.threads, require_skew=False)
        details = []
        for (a, b, c), d in rep.failures:
            details.append(f"triple ({sig.names[a]}, {sig.names[b]}, {sig.names[c]}):")
            details.extend(f"  {x}" for x in laurent_lines(d))
        r.check("jacobi", rep.ok, details)
    return r


def _jacobi_lines(sig: Signature, failures) -> list[str]:
    out = []
    for (a, b, c), bad in failures:
        out.append(f"triple ({sig.names[a]}, {sig.names[b]}, {sig.names[c]}):")
        grouped: dict = {}
        for (e, key), v in bad.items():
            grouped.setdefault(e, {})[key] = v
        for e in sorted(grouped):
            out.append(f"  {format_monomial(e) or '1'}: {format_tensor(Tensor._raw(sig, 3, grouped[e]))}")
    return out


def cmd_eval(args) -> Report:
    spec = _need_local(load_spec(args.spec), "eval")
    f, g = _poly(spec.sig, args.left, "--left"), _poly(spec.sig, args.right, "--right")
    r = Report("eval")
    r.section(f"{{{{{f} λ {g}}}}}", laurent_lines(eval_bracket(spec, f, g)))
    return r


def cmd_triple(args) -> Report:
    spec = _need_local(load_spec(args.spec), "triple")
    a, b, c = (_poly(spec.sig, x, f"--{n}") for x, n in ((args.a, "a"), (args.b, "b"), (args.c, "c")))
    r = Report("triple")
    r.section(f"triple bracket ({a}, {b}, {c})", laurent_lines(triple_bracket(spec, a, b, c)))
    return r


def cmd_flow(args) -> Report:
    spec = _need_local(load_spec(args.spec), "flow")
    h = _poly(spec.sig, args.hamiltonian, "--hamiltonian")
    E = hamiltonian_flow(spec, h)
    r = Report("flow")
    r.section(f"Hamiltonian ∫({h})", str(E).split("\n"))
    E2 = hamiltonian_flow_operator(spec, h)
    r.check("bracket and operator forms agree", E.P == E2.P)
    return r


def cmd_rep(args) -> Report:
    spec = _need_local(load_spec(args.spec), "rep")
    N = args.n
    if N < 1:
        raise SpecError("--n must be at least 1")
    cs = induce_bracket(spec, N)
    sig = spec.sig
    r = Report("rep")
    lines = []
    for y, z in product(cs.gens(), repeat=2):
        br = cs.gen_bracket(y, z)
        if not br:
            continue
        by_exp: dict = {}
        for (e, m), c in br.items():
            by_exp.setdefault(e, {})[m] = c
        body = " ; ".join(f"λ^{e}: {format_comm(sig, by_exp[e], N)}" for e in sorted(by_exp))
        lines.append(f"{{{format_cgen(sig, y, N)} λ {format_cgen(sig, z, N)}}} = {body}")
    r.section(f"induced brackets on generators, N = {N}", lines or ["0"])
    rep = check_commutative_mpva(cs, args.threads)
    r.check("commutative skew", not rep.skew_failures, [f"{format_cgen(sig, y, N)}, {format_cgen(sig, z, N)}" for (y, z), _ in rep.skew_failures])
    r.check("commutative jacobi", not rep.jacobi_failures, [", ".join(format_cgen(sig, g, N) for g in t) for t, _ in rep.jacobi_failures])
    return r


def _class1_data(spec: BracketSpec) -> tuple[Tensor, int] | None:
    if spec.sig.nvars != 1:
        return None
    p = spec.gen(0, 0)
    exps = [e[0] for e, _ in p.coeffs()]
    if not exps or max(exps) < 1:
        return None
    N = max(exps)
    f = dict(p.coeffs())[(N,)]
    if class1_bracket(f, N) != spec:
        return None
    return f, N


def cmd_classify_r1(args) -> Report:
    spec = _need_local(load_spec(args.spec), "classify-r1")
    r = Report("classify-r1")
    data = _class1_data(spec)
    if data is None:
        r.check("bracket has the form f λ^N - (λS)^-N f^σ", False)
        return r
    f, N = data
    ok, wit = check_class_r1(f, N)
    r.section("data", [f"N = {N}", f"f = {format_tensor(f)}"])
    det = []
    if ok and wit is not None:
        c, t = wit
        det.append(f"f = {format_coeff(c)} * 1⊗1" if t is None else f"f = {format_coeff(c)} * g.S^N g with g = (u + {format_coeff(t)})⊗(u + {format_coeff(t)})")
    r.check("classification condition", ok, det)
    jac = check_jacobi(spec, args.threads).ok
    r.check("classification agrees with the Jacobi identity", jac == ok)
    return r


def _class2_data(spec: BracketSpec) -> dict | None:
    sig = spec.sig
    if sig.nvars != 2 or spec.gen(0, 0).terms or spec.gen(1, 1).terms:
        return None
    Ks: dict = {}
    for (k,), t in spec.gen(0, 1).coeffs():
        K: dict = {}
        for (left, right), c in t.terms.items():
            na = 0
            while na < len(left) and left[na] == (1, 0):
                na += 1
            rest = left[na:]
            nb = len(rest)
            if any(x != (0, sig.red(k)) for x in rest) or na > 1 or nb > 1:
                return None
            nc = 0
            while nc < len(right) and right[nc] == (0, sig.red(k)):
                nc += 1
            tail = right[nc:]
            if any(x != (1, 0) for x in tail) or nc > 1 or len(tail) > 1:
                return None
            K[(na, nb, nc, len(tail))] = c
        Ks[k] = K
    if class2_bracket(sig, Ks) != spec:
        return None
    return Ks


def cmd_classify_r2(args) -> Report:
    spec = _need_local(load_spec(args.spec), "classify-r2")
    r = Report("classify-r2")
    Ks = _class2_data(spec)
    if Ks is None:
        r.check("bracket has the two-variable normal form", False)
        return r
    ok, bad = check_class_r2(Ks)
    r.section("coefficients", [f"k = {k}: " + ", ".join(f"K{''.join(map(str, idx))} = {format_coeff(Fraction(c))}" for idx, c in sorted(K.items())) for k, K in sorted(Ks.items())])
    r.check("classification conditions", ok, bad)
    jac = check_jacobi(spec, args.threads).ok
    r.check("classification agrees with the Jacobi identity", jac == ok)
    return r


def _series_lines(s) -> list[str]:
    return [f"z^{e[0]}: {format_coeff(c)}" for e, c in sorted(s.coeffs.items())] or ["0"]


def cmd_rational_iota(args) -> Report:
    try:
        r_fn = parse_rational(args.function)
    except (ValueError, ZeroDivisionError) as e:
        raise SpecError(f"--function: {e}") from None
    d = 1 if args.direction == "+" else -1
    s = iota_expand(r_fn, d, args.window)
    r = Report("rational iota")
    r.section(f"ι{args.direction} {r_fn}", _series_lines(s))
    r.section("window", [f"{s.lo[0]}:{s.hi[0]}"])
    return r


def cmd_rational_nib(args) -> Report:
    alpha, beta = Fraction(args.alpha), Fraction(args.beta)
    r = Report("rational nib")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        H = build_nib(alpha, beta, args.k, args.p)
    r.section("operator", [str(H)])
    r.check("α(2β+α) = 0", not caught, [str(w.message) for w in caught])
    a, b, c = nib_functions(alpha, beta, args.k, args.p)
    fe = check_functional_equations(a, b, c, args.window)
    det = [f"γ = {format_coeff(fe.gamma)}"]
    for name, res in sorted(fe.residuals.items()):
        for e in sorted(res)[:8]:
            det.append(f"{name}: z^{e[0]} w^{e[1]} residual {format_coeff(res[e])}")
    r.check(f"functional equations on [{args.window[0]},{args.window[1]}]^2", fe.ok, det)
    sb = rational_generator_bracket(H.sig, {(0, 0): H})
    rep = check_truncated_bracket(sb, args.window)
    r.check("skew (rational)", rep.rational_skew)
    r.check("jacobi (generators, truncated)", rep.jacobi, _jacobi_lines(H.sig, rep.jacobi_failures)[:20])
    return r


def cmd_rational_check(args) -> Report:
    spec = load_spec(args.spec)
    if isinstance(spec, BracketSpec):
        spec = rational_generator_bracket(spec.sig, _as_rational_ops(spec))
    return cmd_check_rational(spec, args)


def _as_rational_ops(spec: BracketSpec) -> dict:
    one = Tensor.unit(spec.sig)
    return {ij: RationalPseudoOp(spec.sig, [(1, (t, RationalFn.monomial(1, e[0]), one)) for e, t in p.coeffs()]) for ij, p in spec.pairs.items()}


def cmd_check_rational(spec: SeriesBracket, args) -> Report:
    r = Report("rational check")
    _series_checks(r, spec, args.window, True, True)
    return r


def _series_checks(r: Report, spec: SeriesBracket, window: tuple[int, int], skew: bool, jacobi: bool) -> None:
    """Skew and Jacobi checks of a series bracket.

    A rational bracket is judged by the rational reading of skewsymmetry;
    the bilateral-series reading is then reported for information only.
    """
    rep = check_truncated_bracket(spec, window)
    r.section("window", [f"{window[0]}:{window[1]}", f"truncation {rep.truncation[0]}:{rep.truncation[1]}"])
    bilateral = [] if rep.nonlocal_skew else [f"witness {rep.skew_witness}"]
    if skew and rep.rational_skew is not None:
        r.check("skew (rational)", rep.rational_skew)
        r.section("skew (bilateral series, informational)", ["holds" if rep.nonlocal_skew else "fails"] + bilateral)
    elif skew:
        r.check("skew (bilateral series)", rep.nonlocal_skew, bilateral)
    if jacobi:
        r.check("jacobi (generators, truncated)", rep.jacobi, _jacobi_lines(spec.sig, rep.jacobi_failures))


def _signature(args) -> Signature:
    if args.spec:
        return load_spec(args.spec).sig
    names = tuple(n.strip() for n in args.vars.split(",") if n.strip())
    order = None if args.order in (None, "infinite") else int(args.order)
    try:
        return Signature(names, order)
    except ValueError as e:
        raise SpecError(f"--vars: {e}") from None


def cmd_functional_canonicalize(args) -> Report:
    sig = _signature(args)
    f = _poly(sig, args.f, "--f")
    r = Report("functional canonicalize")
    r.section(f"∫({f})", [str(canonicalize(f))])
    return r


def cmd_functional_bracket(args) -> Report:
    spec = _need_local(load_spec(args.spec), "functional bracket")
    f, g = _poly(spec.sig, args.f, "--f"), _poly(spec.sig, args.g, "--g")
    A = functional_bracket(spec, f, g)
    B = functional_bracket_gradient(spec, f, g)
    r = Report("functional bracket")
    r.section(f"{{∫({f}), ∫({g})}}", [str(A)])
    r.check("bracket and gradient forms agree", A == B)
    return r


def cmd_varcomplex_delta(args) -> Report:
    sig = _signature(args)
    r = Report("varcomplex delta")
    if args.degree == 0:
        if len(args.f) != 1:
            raise SpecError("degree 0 takes one --f")
        form = KForm(sig, 0, _poly(sig, args.f[0], "--f"))
        d1 = de_rham_delta(form)
        r.section(f"δ∫({form.data.poly})", [f"{sig.names[i]}: {p}" for i, p in enumerate(d1.data)])
        r.check("δδ = 0", de_rham_delta(d1).is_zero())
        return r
    if args.degree == 1:
        if len(args.f) != sig.nvars:
            raise SpecError(f"degree 1 takes {sig.nvars} --f entries")
        form = KForm(sig, 1, [_poly(sig, x, "--f") for x in args.f])
        d2 = de_rham_delta(form)
        lines = []
        for (i, j) in sorted(d2.data):
            lines.append(f"({sig.names[i]}, {sig.names[j]}):")
            lines.extend(f"  {x}" for x in laurent_lines(d2.data[(i, j)]))
        r.section("δF", lines or ["0"])
        r.check("δδ = 0", de_rham_delta(d2).is_zero())
        return r
    raise SpecError("--degree is 0 or 1")


def cmd_varcomplex_frechet(args) -> Report:
    sig = _signature(args)
    if len(args.f) != sig.nvars:
        raise SpecError(f"frechet takes {sig.nvars} --f entries")
    F = [_poly(sig, x, "--f") for x in args.f]
    D = frechet_derivative(F)
    r = Report("varcomplex frechet")
    lines = []
    for (i, j) in sorted(D.entries):
        lines.append(f"D[{sig.names[i]}, {sig.names[j]}]:")
        lines.extend(f"  {x}" for x in laurent_lines(D.entries[(i, j)]))
    r.section("Frechet derivative", lines or ["0"])
    r.check("closed (D_F self-adjoint)", is_self_adjoint(D)[0])
    return r


# -- argument parsing -----------------------------------------------------------------


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("window LO must not exceed HI")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--threads", type=int, default=1, help="worker threads for the checkers")
    common.add_argument("--window", type=_window, default=(-6, 6), metavar="LO:HI")

    p = argparse.ArgumentParser(prog="dmpva", description="Double multiplicative Poisson vertex algebra toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def spec_cmd(name, fn, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("spec")
        s.set_defaults(fn=fn)
        return s

    s = spec_cmd("check", cmd_check, "check skewsymmetry and the Jacobi identity")
    s.add_argument("--skew", action="store_true")
    s.add_argument("--jacobi", action="store_true")
    s = spec_cmd("eval", cmd_eval, "evaluate {{f λ g}}")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s = spec_cmd("triple", cmd_triple, "triple bracket (Jacobi defect) of three elements")
    for n in ("a", "b", "c"):
        s.add_argument(f"--{n}", required=True)
    s = spec_cmd("flow", cmd_flow, "Hamiltonian evolution equation")
    s.add_argument("--hamiltonian", required=True)
    s = spec_cmd("rep", cmd_rep, "induced bracket on the N x N representation algebra")
    s.add_argument("--n", type=int, default=2)
    spec_cmd("classify-r1", cmd_classify_r1, "one-variable classification")
    spec_cmd("classify-r2", cmd_classify_r2, "two-variable classification")

    rat = sub.add_parser("rational", help="rational functions and rational brackets")
    rsub = rat.add_subparsers(dest="action", required=True)
    s = rsub.add_parser("iota", parents=[common], help="ι± expansion of a rational function of z")
    s.add_argument("--function", required=True)
    s.add_argument("--direction", choices=("+", "-"), default="+")
    s.set_defaults(fn=cmd_rational_iota)
    s = rsub.add_parser("nib", parents=[common], help="the NIB structure and its conditions")
    s.add_argument("--alpha", required=True)
    s.add_argument("--beta", required=True)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--p", type=int, default=0)
    s.set_defaults(fn=cmd_rational_nib)
    s = rsub.add_parser("check", parents=[common], help="skew and Jacobi of a rational spec on a window")
    s.add_argument("spec")
    s.set_defaults(fn=cmd_rational_check)

    fun = sub.add_parser("functional", help="local functionals")
    fsub = fun.add_subparsers(dest="action", required=True)
    s = fsub.add_parser("canonicalize", parents=[common])
    s.add_argument("--f", required=True)
    _sig_args(s)
    s.set_defaults(fn=cmd_functional_canonicalize)
    s = fsub.add_parser("bracket", parents=[common])
    s.add_argument("spec")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.set_defaults(fn=cmd_functional_bracket)

    vc = sub.add_parser("varcomplex", help="variational complex")
    vsub = vc.add_subparsers(dest="action", required=True)
    s = vsub.add_parser("delta", parents=[common])
    s.add_argument("--degree", type=int, default=0)
    s.add_argument("--f", action="append", required=True)
    _sig_args(s)
    s.set_defaults(fn=cmd_varcomplex_delta)
    s = vsub.add_parser("frechet", parents=[common])
    s.add_argument("--f", action="append", required=True)
    _sig_args(s)
    s.set_defaults(fn=cmd_varcomplex_frechet)
    return p


def _sig_args(s: argparse.ArgumentParser) -> None:
    s.add_argument("--spec", help="take the algebra from a spec document")
    s.add_argument("--vars", default="u", help="comma-separated variable names")
    s.add_argument("--order", default=None, help="finite shift order (default infinite)")


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Run a command and return (exit code, report text) without touching stdout."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    report = args.fn(args)
    text = report.to_json() if args.format == "json" else report.to_text()
    return (0 if report.ok else 1), text


def main(argv: Sequence[str] | None = None) -> int:
    try:
        code, text = run(argv)
    except (SpecError, WindowError, NotImplementedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
