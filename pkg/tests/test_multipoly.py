import random
from fractions import Fraction

import pytest

from coblelab.coble import CobleParams, build_cubic, fixed_loci
from coblelab.fields import GF, QQ
from coblelab.heis import index_of
from coblelab.multipoly import (
    DivisibilityError,
    LinearChange,
    MultiPoly,
    evaluate,
    extract_coordinate_power,
    gradient,
    monomial_basis,
    substitute_linear,
)


def random_form(n, d, f, rng, terms=12):
    mons = monomial_basis(n, d)
    return MultiPoly(n, {rng.choice(mons): f.random(rng, nonzero=True) for _ in range(terms)}, f)


def test_monomial_counts():
    assert len(monomial_basis(9, 6)) == 3003
    assert len(monomial_basis(9, 3)) == 165
    assert len(monomial_basis(4, 4)) == 35
    assert monomial_basis(3, 2) == sorted(monomial_basis(3, 2), key=lambda e: tuple(-x for x in e))


def test_evaluate_examples():
    f = GF(7)
    X = MultiPoly.variables(9, f)
    cubes = sum((x**3 for x in X[1:]), X[0] ** 3)
    e00 = [1] + [0] * 8
    assert evaluate(cubes, e00) == f(1)
    prod = X[index_of((0, 0))] * X[index_of((1, 1))] * X[index_of((2, 2))]
    assert evaluate(prod, [1] * 9) == f(1)
    G = build_cubic(CobleParams([3, 0, 0, 0, 0], f))
    assert evaluate(G, [1] * 9) == f(2)
    with pytest.raises(ValueError):
        evaluate(G, [1] * 8)


def test_gradient_and_euler():
    rng = random.Random(1)
    for f in (GF(31), QQ, GF(31, 2)):
        for d in (1, 2, 3, 4):
            F = random_form(5, d, f, rng)
            X = MultiPoly.variables(5, f)
            euler = MultiPoly.zero(5, f)
            for x, dF in zip(X, gradient(F)):
                euler = euler + x * dF
            assert euler == F.scale(d)
    f = GF(31)
    X = MultiPoly.variables(9, f)
    cubes = sum((x**3 for x in X[1:]), X[0] ** 3)
    assert gradient(cubes) == [(x * x).scale(3) for x in X]


def test_homogeneous_scaling():
    rng = random.Random(2)
    f = GF(10009)
    F = random_form(6, 4, f, rng)
    for _ in range(20):
        pt = [f.random(rng) for _ in range(6)]
        lam = f.random(rng, nonzero=True)
        assert evaluate(F, [f.mul(lam, x) for x in pt]) == evaluate(F, pt) * f(lam) ** 4


def test_chain_rule():
    rng = random.Random(3)
    f = GF(31)
    for _ in range(5):
        F = random_form(4, 3, f, rng)
        A = [[f.random(rng) for _ in range(3)] for _ in range(4)]
        ch = LinearChange(A, f)
        lhs = gradient(substitute_linear(F, ch))
        grads = [g.substitute_linear(ch) for g in gradient(F)]
        for j in range(3):
            acc = MultiPoly.zero(3, f)
            for i in range(4):
                acc = acc + grads[i].scale_raw(A[i][j])
            assert lhs[j] == acc


def test_embedding_images():
    f = GF(31)
    loci = fixed_loci(f)
    X = MultiPoly.variables(9, f)
    s = (X[index_of((0, 1))] + X[index_of((0, 2))]).substitute_linear(loci.gamma_minus)
    assert s.is_zero()
    d = (X[index_of((0, 1))] - X[index_of((0, 2))]).substitute_linear(loci.gamma_plus)
    assert d.is_zero()
    with pytest.raises(ValueError):
        LinearChange([[1, 2], [2, 4], [3, 6]], f, embedding=True)


def test_extract_examples():
    f = GF(31)
    x, y, z = MultiPoly.variables(3, f)
    assert extract_coordinate_power(x * x * y, x, 2) == y
    with pytest.raises(DivisibilityError) as e:
        extract_coordinate_power(x * x * y, x, 3)
    assert e.value.valuation == 2
    F = (x + y) ** 2 * (x * x + z * z)
    assert extract_coordinate_power(F, x + y, 2) == x * x + z * z


def test_extract_random():
    rng = random.Random(4)
    for f in (GF(31), GF(10009)):
        for m in (1, 2, 3):
            F = random_form(4, 2, f, rng)
            L = MultiPoly.linear_form([f.random(rng, nonzero=True) for _ in range(4)], f)
            assert extract_coordinate_power(F * L**m, L, m) == F


def test_text_round_trip():
    rng = random.Random(5)
    for f in (GF(31), GF(31, 2), QQ):
        F = random_form(5, 3, f, rng)
        if f is QQ:
            F = F.scale(QQ(Fraction(3, 7)))
        text = F.to_text()
        assert text.splitlines()[0].startswith("vars=5 degree=3 field=")
        G = MultiPoly.from_text(text)
        assert G == F and G.to_text() == text


def test_proportional():
    f = GF(31)
    x, y, z = MultiPoly.variables(3, f)
    F = x * x + y * z
    assert F.proportional(F.scale(7))
    assert not F.proportional(x * x + y * z.scale(2))


def test_guards():
    f = GF(31)
    with pytest.raises(ValueError):
        MultiPoly(11, {}, f)
    x = MultiPoly.variable(0, 2, f)
    with pytest.raises(ValueError):
        x**9
