import random

import numpy as np
import pytest

from coblelab._solve import BudgetError, common_zeros
from coblelab.coble import CobleParams, build_cubic, segre_restriction
from coblelab.dualscan import (
    HyperplaneFitError,
    SamplingError,
    alpha_checks,
    alpha_star_params,
    biduality_check,
    burkhardt_value,
    dual_interpolate,
    find_special_alpha,
    gauss_class_count,
    hyperplane_fit,
    load_alpha_star,
    sample_points,
    singular_scan,
)
from coblelab.fields import GF, FieldError
from coblelab.multipoly import MultiPoly, evaluate

F31 = GF(31)


def xyz(f):
    return MultiPoly.variables(3, f)


def test_sample_points_conic():
    x, y, z = xyz(F31)
    F = x * x + y * y + z * z
    s = sample_points(F, 10, seed=1)
    assert len(s) == 10
    for pt, img in s.pairs:
        assert evaluate(F, list(pt)) == F31(0)
        assert any(img)
    assert (sample_points(F, 10, seed=1).points == s.points).all()


def test_sample_points_singular_error():
    x, _, _ = xyz(F31)
    with pytest.raises(SamplingError):
        sample_points(x * x, 5, seed=0)


def test_dual_conics():
    f = GF(10009)
    x, y, z = xyz(f)
    r = dual_interpolate(x * x + y * y + z * z, 4, seed=1, holdout=50)
    assert r.degree == 2 and r.poly.proportional(x * x + y * y + z * z) and r.holdout_ok
    r = dual_interpolate(x * x + (y * y).scale(2) + z * z, 4, seed=1, holdout=50)
    assert r.poly.proportional((x * x).scale(2) + y * y + (z * z).scale(2))
    assert r.nullity == 1 and r.nullity_prev == 0


def test_dual_fermat_cubic():
    f = GF(10009)
    x, y, z = xyz(f)
    r = dual_interpolate(x**3 + y**3 + z**3, 8, seed=2)
    assert r.degree == 6 and r.nullity == 1 and r.nullity_prev == 0 and r.holdout_ok


def test_dual_cache(tmp_path):
    f = GF(10009)
    x, y, z = xyz(f)
    F = x**3 + y**3 + z**3
    a = dual_interpolate(F, 8, seed=2, cache_dir=tmp_path)
    b = dual_interpolate(F, 8, seed=2, cache_dir=tmp_path)
    assert b.from_cache and not a.from_cache
    assert a.poly == b.poly and a.summary() == b.summary()


def test_oversample_guard():
    x, y, z = xyz(GF(10009))
    with pytest.raises(ValueError):
        dual_interpolate(x * y + z * z, 3, oversample=1.0)


def test_gauss_classes_examples():
    x, y, z = xyz(F31)
    assert gauss_class_count(x * y, 100, seed=0) == 2
    assert gauss_class_count(x * y * z * (x + y + z), 200, seed=0) == 4


def test_gauss_classes_arrangements():
    f = GF(10009)
    rng = random.Random(3)
    for m in range(1, 9):
        forms = [MultiPoly.linear_form([f.random(rng) for _ in range(4)], f) for _ in range(m)]
        F = forms[0]
        for L in forms[1:]:
            F = F * L
        assert gauss_class_count(F, 50 * m, seed=m) == m


def test_singular_scan_examples():
    x, y, z = xyz(F31)
    assert singular_scan(x * x + y * y + z * z) == []
    f7 = GF(7)
    x, y, z = xyz(f7)
    assert singular_scan(x * y) == [(0, 0, 1)]
    with pytest.raises(ValueError):
        singular_scan(MultiPoly.variable(0, 6, F31) ** 3)


@pytest.mark.parametrize("alpha", [(1, 2, 3, 4, 5), (3, 0, 0, 0, 0), (1, 1, 1, 1, 1)])
def test_singular_scan_routes_agree(alpha):
    f = GF(7)
    S = segre_restriction(CobleParams(alpha, f))
    polys = S.gradient() + [S]
    brute, _ = common_zeros(polys, f, "brute")
    ref, _ = common_zeros(polys, f, "reference")
    assert brute == ref
    if len(brute) <= 10:
        elim, _ = common_zeros(polys, f, "elimination")
        assert elim == brute


def test_elimination_matches_brute_extension():
    f = GF(13, 2)
    rng = random.Random(4)
    x, y, z = xyz(GF(13))
    for _ in range(3):
        a, b = rng.randrange(1, 13), rng.randrange(1, 13)
        F = x**3 + (y**3).scale(a) + (z**3).scale(b) + (x * y * z).scale(rng.randrange(13))
        polys = F.gradient() + [F]
        assert common_zeros(polys, f, "elimination")[0] == common_zeros(polys, f, "brute")[0]


def test_fermat_segre_rejected():
    chk = alpha_checks((3, 0, 0, 0, 0), 31)
    assert chk["segre_nodes"] != 10


def test_find_special_alpha_guards():
    with pytest.raises(FieldError):
        find_special_alpha(29, 0)
    with pytest.raises(BudgetError):
        find_special_alpha(67, 0)


def test_find_special_alpha_reproduces_fixture():
    rec = load_alpha_star()
    search = rec["provenance"]["search"]
    params, prov = find_special_alpha(31, search["seed"])
    assert list(params.alpha) == rec["residues"]
    assert prov == search
    assert [a % 31 for a in rec["alpha"]] == rec["residues"]
    assert [a % 10009 for a in rec["alpha"]] == rec["residues_mod"]["10009"]


def test_prefilter_gives_same_alpha():
    rec = load_alpha_star()
    params, prov = find_special_alpha(31, rec["provenance"]["search"]["seed"], prefilter=True)
    assert list(params.alpha) == rec["residues"]
    assert prov["rejected"]["off_burkhardt"] > 0


def test_fixture_nodes():
    a = alpha_star_params(31)
    assert len(singular_scan(segre_restriction(a), GF(31, 2))) == 10
    assert burkhardt_value(list(a.alpha), F31) == 0


def test_rank_deficient_singular_point():
    # alpha0 = 0 puts a singular point at (1:0:0:0:0) whatever the rest is,
    # including alpha off the Burkhardt quartic
    rng = random.Random(5)
    for _ in range(5):
        alpha = [0] + [rng.randrange(1, 31) for _ in range(4)]
        S = segre_restriction(CobleParams(alpha, F31))
        assert (1, 0, 0, 0, 0) in singular_scan(S, F31)
    assert burkhardt_value([0, 1, 2, 3, 4], F31) != 0


def test_hyperplane_fit():
    rng = random.Random(6)
    pts = [[F31.random(rng) for _ in range(4)] + [0] for _ in range(5)]
    while np.linalg.matrix_rank(np.array(pts, dtype=float)[:, :4]) < 4:
        pts = [[F31.random(rng) for _ in range(4)] + [0] for _ in range(5)]
    assert hyperplane_fit(pts, F31) == MultiPoly.variable(4, 5, F31)
    six = [[F31.random(rng) for _ in range(4)] for _ in range(6)]
    with pytest.raises(HyperplaneFitError) as e:
        hyperplane_fit(six, F31)
    assert e.value.dim == 0


def test_biduality_small():
    f = GF(10009)
    x, y, z = xyz(f)
    assert biduality_check(x * x + y * y + z * z, 4, seed=0)
    X = MultiPoly.variables(4, f)
    Q = X[0] ** 2 + (X[1] ** 2).scale(2) + (X[2] ** 2).scale(3) + (X[3] ** 2).scale(5)
    assert biduality_check(Q, 4, seed=0)


def test_segre_biduality_fixture():
    S = segre_restriction(alpha_star_params(31))
    v = biduality_check(S, 5, seed=0)
    assert v and v.detail["dual"]["degree"] == 4 and v.detail["double_dual"]["degree"] == 3
