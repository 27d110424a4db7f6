"""Write the JSON fixtures under fixtures/.

Every document here is typed in by hand as plain data (no package code is
imported), so the test suite can compare the library against it.
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def w(*letters):
    """A word from (name, shift) pairs."""
    return [[n, s] for n, s in letters]


ONE: list = []


def term(lam, *rows):
    return {"lambda": lam, "tensor": [list(r) for r in rows]}


def spec(variables, bracket, order="infinite", description="", rational=None):
    doc = {"algebra": {"variables": variables, "order": order}, "bracket": bracket}
    if rational is not None:
        doc["rational"] = rational
    if description:
        doc["description"] = description
    return doc


def rat(num, den):
    return {"num": [str(x) for x in num], "den": [str(x) for x in den]}


def tens(*rows):
    return {"tensor": [list(r) for r in rows]}


U, V = ("u", 0), ("v", 0)


def not_jacobi(alpha, beta, r):
    ur, vm, um = ("u", r), ("v", -r), ("u", 0)
    return spec(
        ["u", "v"],
        {
            "u,v": [term(r, ["1", w(V), w(ur)], ["1", w(ur), w(V)], [str(alpha), w(V), w(V)], [str(beta), w(ur), w(ur)])],
            "v,u": [term(-r, ["-1", w(um), w(vm)], ["-1", w(vm), w(um)], [str(-alpha), w(vm), w(vm)], [str(-beta), w(um), w(um)])],
        },
        description=f"skew bracket u,v = (v(x)u_r + u_r(x)v + a v(x)v + b u_r(x)u_r) l^r with a={alpha}, b={beta}, r={r}",
    )


FIXTURES = {
    "free_commutator.json": spec(
        ["u"],
        {"u,u": [term(0, ["1", w(U), ONE], ["-1", ONE, w(U)])]},
        description="free algebra on the lattice u_i with {{u _l u}} = u(x)1 - 1(x)u",
    ),
    "canonical_pair.json": spec(
        ["u", "v"],
        {"v,u": [term(0, ["1", ONE, ONE])], "u,v": [term(0, ["-1", ONE, ONE])]},
        description="canonical pair {{v _l u}} = 1(x)1 on two lattices",
    ),
    "cyclic_order5.json": spec(
        ["u"],
        {"u,u": [term(0, ["1", w(U), ONE], ["-1", ONE, w(U)])]},
        order=5,
        description="closed chain of five generators, {{u_i _l u_j}} = l^[j-i] (u_j(x)1 - 1(x)u_j)",
    ),
    "rotation_order4.json": spec(
        ["u", "v"],
        {
            "u,u": [term(1, ["1", ONE, ONE]), term(3, ["-1", ONE, ONE])],
            "v,v": [term(1, ["1", ONE, ONE]), term(3, ["-1", ONE, ONE])],
            "v,u": [term(0, ["1", ONE, ONE]), term(2, ["-1", ONE, ONE])],
            "u,v": [term(0, ["-1", ONE, ONE]), term(2, ["1", ONE, ONE])],
        },
        order=4,
        description=(
            "lambda-brackets induced by {{v, u}} = 1(x)1 under the order-4 automorphism u -> v, v -> -u; "
            "data only, the automorphism is not a shift"
        ),
    ),
    "simple_pair.json": spec(
        ["u", "v"],
        {"u,v": [term(0, ["1", ONE, ONE])], "v,u": [term(0, ["-1", ONE, ONE])]},
        description="{{u _l v}} = 1(x)1; the flow of 1/k u^k is dv/dt = u^(k-1)",
    ),
    "not_jacobi_a1_b2_r0.json": not_jacobi(1, 2, 0),
    "not_jacobi_a2_b1_r3.json": not_jacobi(2, 1, 3),
    "quartic_pair_r1_a3.json": spec(
        ["u", "v"],
        {
            "u,v": [term(1,
                         ["3", w(V, ("u", 1)), w(("u", 1), V)],
                         ["1", w(V, ("u", 1)), ONE],
                         ["1", ONE, w(("u", 1), V)],
                         ["1/3", ONE, ONE])],
            "v,u": [term(-1,
                         ["-3", w(U, ("v", -1)), w(("v", -1), U)],
                         ["-1", ONE, w(("v", -1), U)],
                         ["-1", w(U, ("v", -1)), ONE],
                         ["-1/3", ONE, ONE])],
        },
        description="{{u _l v}} = (3 v u_1(x)u_1 v + v u_1(x)1 + 1(x)u_1 v + 1/3) l",
    ),
    "quadratic_pair_r1_a3.json": spec(
        ["u", "v"],
        {
            "u,v": [term(1,
                         ["3", w(V), w(V)],
                         ["1", w(V), w(("u", 1))],
                         ["1", w(("u", 1)), w(V)],
                         ["1/3", w(("u", 1)), w(("u", 1))])],
            "v,u": [term(-1,
                         ["-3", w(("v", -1)), w(("v", -1))],
                         ["-1", w(U), w(("v", -1))],
                         ["-1", w(("v", -1)), w(U)],
                         ["-1/3", w(U), w(U)])],
        },
        description="{{u _l v}} = (3 v(x)v + v(x)u_1 + u_1(x)v + 1/3 u_1(x)u_1) l",
    ),
    "volterra_square.json": spec(
        ["u"],
        {"u,u": [term(1, ["1", w(U, ("u", 1)), w(("u", 1), U)]),
                 term(-1, ["-1", w(U, ("u", -1)), w(("u", -1), U)])]},
        description="{{u _l u}} = (u u_1(x)u_1 u) l - (u u_-1(x)u_-1 u) l^-1",
    ),
    "rational_constant.json": spec(
        ["u"],
        {},
        rational={"u,u": [{"coeff": "1", "chain": [tens(["1", ONE, ONE]), rat([1, 1], [1, -1]), tens(["1", ONE, ONE])]}]},
        description="{{u _l u}} = (1+l)/(1-l) 1(x)1: rationally skew but not skew as a bilateral series",
    ),
    "rational_quadratic.json": spec(
        ["u"],
        {},
        rational={"u,u": [{"coeff": "1", "chain": [tens(["1", w(U), w(U)]), rat([1, 1], [1, -1]), tens(["1", w(U), w(U)])]}]},
        description="{{u _l u}} = (u(x)u) (1+S)/(1-S) (u(x)u) as a rational pseudodifference operator",
    ),
    "nib_m1_half_k1_p2.json": spec(
        ["u"],
        {},
        rational={"u,u": [
            {"coeff": "1", "chain": [tens(["1", ONE, w(U)]), rat([0, 0, -1], [1, -1]), tens(["1", ONE, w(U)])]},
            {"coeff": "1", "chain": [tens(["1", ONE, w(U)]), rat(["1/2", "1/2"], [1, -1]), tens(["1", w(U), ONE])]},
            {"coeff": "1", "chain": [tens(["1", w(U), ONE]), rat(["1/2", "1/2"], [1, -1]), tens(["1", ONE, w(U)])]},
            {"coeff": "-1", "chain": [tens(["1", w(U), ONE]), rat([-1], [0, -1, 1]), tens(["1", w(U), ONE])]},
        ]},
        description="a = -z^2/(1-z), b = c = (1+z)/(2(1-z)) in the four-term nonlocal operator",
    ),
    "nib_0_1_k2_p0.json": spec(
        ["u"],
        {},
        rational={"u,u": [
            {"coeff": "1", "chain": [tens(["1", ONE, w(U)]), rat([1, 0, 1], [1, 0, -1]), tens(["1", w(U), ONE])]},
            {"coeff": "1", "chain": [tens(["1", w(U), ONE]), rat([1, 0, 1], [1, 0, -1]), tens(["1", ONE, w(U)])]},
        ]},
        description="a = 0, b = c = (1+z^2)/(1-z^2) in the four-term nonlocal operator",
    ),
}

# delta of a functional, of a 1-form and of a 2-form, each computed by hand.
VARIATIONAL = {
    "description": "variational differential on one variable u; values computed by hand",
    "variables": ["u"],
    "functional": "u*u[1]",
    "delta_functional": ["u[-1] + u[1]"],
    "one_form": ["u[1]"],
    "delta_one_form": {"u,u": [[["1/2"], [1], [], []], [["-1/2"], [-1], [], []]]},
    "two_form": {"u,u": [[["1"], [0], [["u", 0]], []], [["-1"], [0], [], [["u", 0]]]]},
    "delta_two_form": {"u,u,u": [[["2"], [0, 0], [], [], []]]},
}


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for name, doc in FIXTURES.items():
        (OUT / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (OUT / "variational_u_u1.json").write_text(json.dumps(VARIATIONAL, indent=2, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
