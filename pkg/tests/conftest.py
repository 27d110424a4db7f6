from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dmpva.bracket import BracketSpec
from dmpva.cli import load_spec
from dmpva.diffop import Laurent
from dmpva.ncalg import NCPoly, Signature
from dmpva.tensor import Tensor

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SIG1 = Signature(("u",))
SIG2 = Signature(("u", "v"))


def fixture_spec(name: str):
    return load_spec(FIXTURES / name)


def fixture_json(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# -- hypothesis strategies --------------------------------------------------

def words(sig: Signature, max_len: int = 3, shifts: int = 2):
    letter = st.tuples(st.integers(0, sig.nvars - 1), st.integers(-shifts, shifts))
    return st.lists(letter, max_size=max_len).map(tuple)


def polys(sig: Signature, max_terms: int = 3, max_len: int = 3, shifts: int = 2):
    coeff = st.integers(-3, 3).filter(bool)
    return st.dictionaries(words(sig, max_len, shifts), coeff, max_size=max_terms).map(lambda d: NCPoly(sig, d))


def tensors(sig: Signature, arity: int = 2, max_terms: int = 3, max_len: int = 2, shifts: int = 2):
    key = st.tuples(*[words(sig, max_len, shifts)] * arity)
    coeff = st.integers(-3, 3).filter(bool)
    return st.dictionaries(key, coeff, max_size=max_terms).map(lambda d: Tensor(sig, arity, d))


def laurents(sig: Signature, arity: int = 2, max_terms: int = 3, exps: int = 2):
    def build(items):
        acc = Laurent.zero(sig, arity, 1)
        for e, t in items:
            acc = acc + Laurent.monomial(t, (e,))
        return acc

    return st.lists(st.tuples(st.integers(-exps, exps), tensors(sig, arity, 2)), max_size=max_terms).map(build)


# -- plain random generators (for fixed-count loops) ------------------------

def rand_word(rng: random.Random, sig: Signature, max_len: int = 3, shifts: int = 2) -> tuple:
    return tuple((rng.randrange(sig.nvars), rng.randint(-shifts, shifts)) for _ in range(rng.randint(0, max_len)))


def rand_poly(rng: random.Random, sig: Signature, terms: int = 3, max_len: int = 3, shifts: int = 2) -> NCPoly:
    return NCPoly(sig, {rand_word(rng, sig, max_len, shifts): rng.choice([-2, -1, 1, 2, 3]) for _ in range(terms)})


def rand_tensor(rng: random.Random, sig: Signature, arity: int = 2, terms: int = 3, max_len: int = 2) -> Tensor:
    return Tensor(sig, arity, {tuple(rand_word(rng, sig, max_len) for _ in range(arity)): rng.choice([-2, -1, 1, 3]) for _ in range(terms)})


def rand_spec(rng: random.Random, sig: Signature, terms: int = 2, exps: int = 2) -> BracketSpec:
    """A random local spec (not necessarily skew)."""
    pairs = {}
    for i in range(sig.nvars):
        for j in range(sig.nvars):
            acc = Laurent.zero(sig)
            for _ in range(rng.randint(0, terms)):
                acc = acc + Laurent.monomial(rand_tensor(rng, sig, 2, 2, 2), (rng.randint(-exps, exps),))
            if acc:
                pairs[(i, j)] = acc
    return BracketSpec(sig, pairs)


def skew_spec(rng: random.Random, sig: Signature, terms: int = 2, exps: int = 2) -> BracketSpec:
    """A random skew local spec: H - H* is skew-adjoint for any H."""
    from dmpva.diffop import adjoint

    H = rand_spec(rng, sig, terms, exps).H
    return BracketSpec.from_H(H - adjoint(H))


def frac(x) -> Fraction:
    return Fraction(x)


# -- acceptance verdicts -------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(n: int, ok: bool, what: str) -> None:
    ACCEPTANCE[n] = (bool(ok), what)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {what}")


def pytest_terminal_summary(terminalreporter) -> None:
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, what = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {what}")
