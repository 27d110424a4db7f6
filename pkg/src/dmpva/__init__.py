"""Double multiplicative Poisson vertex algebras on free difference algebras."""

from .bracket import (
    BracketSpec,
    check_class_r1,
    check_class_r2,
    check_jacobi,
    check_skew,
    eval_bracket,
    triple_bracket,
)
from .cli import parse_spec, serialize_spec
from .diffop import DiffOp, Laurent, adjoint, compose
from .hamiltonian import (
    KForm,
    LocalFunctional,
    canonicalize,
    de_rham_delta,
    frechet_derivative,
    functional_bracket,
    hamiltonian_flow,
    variational_derivative,
)
from .ncalg import NCPoly, Signature
from .rational import (
    RationalFn,
    RationalPseudoOp,
    TruncatedSeries,
    build_nib,
    check_functional_equations,
    check_truncated_bracket,
    iota_expand,
    rat_adjoint,
    rat_compose,
)
from .rep import CommBracketSpec, check_commutative_mpva, induce_bracket, rep_matrix, trace_functional
from .tensor import Mode, Tensor, bullet, sigma

__version__ = "0.1.0"

__all__ = [
    "BracketSpec",
    "CommBracketSpec",
    "DiffOp",
    "KForm",
    "Laurent",
    "LocalFunctional",
    "Mode",
    "NCPoly",
    "RationalFn",
    "RationalPseudoOp",
    "Signature",
    "Tensor",
    "TruncatedSeries",
    "adjoint",
    "build_nib",
    "bullet",
    "canonicalize",
    "check_class_r1",
    "check_class_r2",
    "check_commutative_mpva",
    "check_functional_equations",
    "check_jacobi",
    "check_skew",
    "check_truncated_bracket",
    "compose",
    "de_rham_delta",
    "eval_bracket",
    "frechet_derivative",
    "functional_bracket",
    "hamiltonian_flow",
    "induce_bracket",
    "iota_expand",
    "parse_spec",
    "rat_adjoint",
    "rat_compose",
    "rep_matrix",
    "serialize_spec",
    "sigma",
    "trace_functional",
    "triple_bracket",
    "variational_derivative",
]
