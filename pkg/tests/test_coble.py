import random
from fractions import Fraction

import pytest

from coblelab.coble import (
    CobleParams,
    build_cubic,
    check_fixed_locus_mapping,
    check_minus_relation,
    check_restricted_dual_commutes,
    check_tau_equivariance,
    fixed_loci,
    pairing_scale,
    polar_map,
    secant_threefold_degree,
    segre_display,
    segre_restriction,
    sigma_degree,
)
from coblelab.fields import GF, QQ, FieldError
from coblelab.heis import INDEX, c3_groups, index_of, invariant_subspace, tau_act
from coblelab.linalg import MatrixF
from coblelab.multipoly import LinearChange, MultiPoly, monomial_basis

F31 = GF(31)


def rand_alpha(f, rng):
    while True:
        if f is QQ:
            a = [Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(5)]
        else:
            a = [f.random(rng) for _ in range(5)]
        if any(a):
            return CobleParams(a, f) if f is QQ else CobleParams([f(x) for x in a], f)


def tau_symmetric(F):
    return F + tau_act(F)


def test_params_guards():
    with pytest.raises(ValueError):
        CobleParams([0] * 5, F31)
    with pytest.raises(ValueError):
        CobleParams([1, 2], F31)
    with pytest.raises(FieldError):
        CobleParams([1] * 5, GF(3))


def test_build_examples():
    X = MultiPoly.variables(9, F31)
    G = build_cubic(CobleParams([3, 0, 0, 0, 0], F31))
    assert G == sum((x**3 for x in X[1:]), X[0] ** 3)
    G = build_cubic(CobleParams([0, 1, 0, 0, 0], F31))
    assert G == c3_groups(F31)[1].scale(2)
    assert len(build_cubic(CobleParams([1, 1, 1, 1, 1], F31)).terms) == 21


def test_build_in_invariant_span():
    rng = random.Random(1)
    mons = monomial_basis(9, 3)
    basis = [[B.terms.get(e, 0) for e in mons] for B in invariant_subspace(3, F31)]
    for _ in range(10):
        G = build_cubic(rand_alpha(F31, rng))
        row = [G.terms.get(e, 0) for e in mons]
        assert MatrixF(basis + [row], F31).rank() == 5
        assert tau_act(G) == G


def test_polar_map():
    X = MultiPoly.variables(9, F31)
    G = build_cubic(CobleParams([3, 0, 0, 0, 0], F31))
    assert polar_map(G) == [(x * x).scale(3) for x in X]
    rng = random.Random(2)
    for f in (QQ, F31):
        G = build_cubic(rand_alpha(f, rng))
        grad = polar_map(G)
        assert len(grad) == 9
        euler = MultiPoly.zero(9, f)
        for x, g in zip(MultiPoly.variables(9, f), grad):
            euler = euler + x * g
        assert euler == G.scale(3)
    with pytest.raises(ValueError):
        polar_map(X[0] ** 2)


def test_tau_equivariance():
    rng = random.Random(3)
    for f in (QQ, F31):
        assert check_tau_equivariance(build_cubic(rand_alpha(f, rng)))
    v = check_tau_equivariance(MultiPoly.variable(index_of((0, 1)), 9, F31) ** 3)
    assert not v and v.detail["failing_index"] == "01"


def test_gradient_commutes_with_tau():
    # tau is a coordinate permutation, so partials are permuted along with it
    rng = random.Random(4)
    perm = [index_of((-b[0], -b[1])) for b in INDEX]
    tau = [[1 if perm[i] == j else 0 for j in range(9)] for i in range(9)]
    T = LinearChange(tau, F31)
    for d in (2, 3, 4):
        mons = monomial_basis(9, d)
        F = tau_symmetric(MultiPoly(9, {rng.choice(mons): rng.randrange(1, 31) for _ in range(8)}, F31))
        grad = F.gradient()
        for i in range(9):
            assert grad[i].substitute_linear(T) == grad[perm[i]]


def test_fixed_locus_mapping():
    rng = random.Random(5)
    G = build_cubic(rand_alpha(F31, rng))
    plus = check_fixed_locus_mapping(G, "+")
    minus = check_fixed_locus_mapping(G, "-")
    assert plus and minus and minus.detail["target"] == "+"
    H = G * G
    v = check_fixed_locus_mapping(H, "-")
    assert v and v.detail["target"] == "-"
    with pytest.raises(ValueError):
        check_fixed_locus_mapping(MultiPoly.variable(1, 9, F31) ** 3, "+")


def test_fixed_loci_embeddings():
    loci = fixed_loci(F31)
    for L in loci.minus_forms:
        assert L.substitute_linear(loci.gamma_minus).is_zero()
    for L in loci.plus_forms:
        assert L.substitute_linear(loci.gamma_plus).is_zero()
    Z = MultiPoly.variables(4, F31)
    X = MultiPoly.variables(9, F31)
    img = [x.substitute_linear(loci.gamma_minus) for x in X]
    assert img[index_of((0, 1))] == Z[0] and img[index_of((0, 2))] == -Z[0]
    assert img[index_of((2, 1))] == -Z[3] and img[0].is_zero()


def test_minus_relation():
    rng = random.Random(6)
    for f in (QQ, F31):
        for _ in range(5):
            rel = check_minus_relation(rand_alpha(f, rng))
            assert rel["corrected"]
            assert not rel["literal"]


def test_restricted_dual_commutes():
    rng = random.Random(7)
    G = build_cubic(rand_alpha(F31, rng))
    assert check_restricted_dual_commutes(G, "+")
    assert check_restricted_dual_commutes(G * G, "-")
    assert pairing_scale("+") == [1, 2, 2, 2, 2] and pairing_scale("-") == [2, 2, 2, 2]
    mons = monomial_basis(9, 6)
    F = MultiPoly(9, {rng.choice(mons): rng.randrange(1, 31) for _ in range(30)}, F31)
    assert not check_restricted_dual_commutes(F, "-")


def test_segre_examples():
    Y = MultiPoly.variables(5, F31)
    S = segre_restriction(CobleParams([3, 0, 0, 0, 0], F31))
    assert S == Y[0] ** 3 + sum(((y**3).scale(2) for y in Y[1:]), MultiPoly.zero(5, F31))
    S = segre_restriction(CobleParams([0, 1, 0, 0, 0], F31))
    assert S == (Y[0] * Y[1] ** 2 + (Y[2] * Y[3] * Y[4]).scale(2)).scale(2)


def test_segre_matches_display():
    rng = random.Random(8)
    for f in (QQ, F31, GF(10009)):
        for _ in range(10):
            a = rand_alpha(f, rng)
            S = segre_restriction(a)
            assert S == segre_display(a) and not S.is_zero()


def test_closed_forms():
    assert sigma_degree(5, 4, 2) == 45
    assert sigma_degree(1, 0, 0) == 1
    assert sigma_degree(0, 0, 0) == 0
    assert secant_threefold_degree(6, 2) == 8
    assert secant_threefold_degree(3, 1) == 0
    assert secant_threefold_degree(4, 3) == 0
