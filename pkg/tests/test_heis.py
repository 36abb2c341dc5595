import random

import pytest

from coblelab.coble import CobleParams, build_cubic
from coblelab.fields import GF, FieldError, cube_root_of_unity
from coblelab.heis import (
    INDEX,
    HeisenbergElement,
    TAU,
    act,
    c3_groups,
    index_of,
    invariant_subspace,
    is_invariant,
    tau_act,
)
from coblelab.linalg import MatrixF
from coblelab.multipoly import MultiPoly, monomial_basis

F31 = GF(31)


def x(b, f=F31):
    return MultiPoly.variable(index_of(b), 9, f)


def random_poly(f, rng, d=3, terms=10):
    mons = monomial_basis(9, d)
    return MultiPoly(9, {rng.choice(mons): f.random(rng, nonzero=True) for _ in range(terms)}, f)


def test_act_examples():
    row = x((0, 0)) * x((0, 1)) * x((0, 2))
    assert act(HeisenbergElement((0, 1), (0, 0)), row) == row
    diag = x((0, 0)) * x((1, 1)) * x((2, 2))
    assert act(HeisenbergElement((0, 0), (0, 1)), diag) == diag
    cube = x((0, 1)) ** 3
    assert act(HeisenbergElement((0, 0), (0, 1)), cube) == cube
    w = cube_root_of_unity(F31).v
    assert act(HeisenbergElement((0, 0), (0, 1)), x((0, 1))) == x((0, 1)).scale_raw(w)
    assert act(HeisenbergElement((1, 0), (0, 0)), x((0, 1))) == x((1, 1))


def test_act_needs_cube_root():
    with pytest.raises(FieldError):
        act(HeisenbergElement((0, 0), (1, 0)), x((0, 0), GF(29)))


def test_tau_examples():
    assert tau_act(x((0, 1))) == x((0, 2))
    assert tau_act(x((0, 0))) == x((0, 0))
    G = build_cubic(CobleParams([5, 7, 1, 3, 2], F31))
    assert tau_act(G) == G
    assert TAU.permutation()[TAU.permutation()[4]] == 4


def test_tau_involution_random():
    rng = random.Random(1)
    for _ in range(50):
        F = random_poly(F31, rng, d=rng.randint(1, 4))
        assert tau_act(tau_act(F)) == F


def test_group_law():
    rng = random.Random(2)
    F = random_poly(F31, rng, d=2, terms=15)
    for _ in range(200):
        g = HeisenbergElement((rng.randrange(3), rng.randrange(3)), (rng.randrange(3), rng.randrange(3)))
        h = HeisenbergElement((rng.randrange(3), rng.randrange(3)), (rng.randrange(3), rng.randrange(3)))
        assert act(g, act(h, F)).proportional(act(g * h, F))


def test_invariant_dimensions():
    for f in (F31, GF(7), GF(31, 2)):
        assert invariant_subspace(1, f) == []
        assert invariant_subspace(2, f) == []
    B3 = invariant_subspace(3, F31)
    assert len(B3) == 5
    mons = monomial_basis(9, 3)
    span = [[B.terms.get(e, 0) for e in mons] for B in B3]
    groups = [[g.terms.get(e, 0) for e in mons] for g in c3_groups(F31)]
    assert MatrixF(span, F31).rank() == MatrixF(span + groups, F31).rank() == 5


def test_index_sum_zero():
    for B in invariant_subspace(3, F31):
        for e in B.terms:
            s = [0, 0]
            for i, k in enumerate(e):
                s[0] += k * INDEX[i][0]
                s[1] += k * INDEX[i][1]
            assert s[0] % 3 == 0 and s[1] % 3 == 0


def test_is_invariant_reports_phase():
    rep = is_invariant(x((0, 1)) ** 2 * x((0, 0)))
    assert not rep["invariant"]
    assert any(fl["phase_exponent"] in (1, 2) for fl in rep["failures"])
    assert is_invariant(build_cubic(CobleParams([1, 2, 3, 4, 5], F31)))["invariant"]


def test_degree_guard():
    with pytest.raises(ValueError):
        invariant_subspace(7, F31)
