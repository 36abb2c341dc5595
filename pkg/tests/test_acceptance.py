"""The ten acceptance criteria, each at its stated tolerance and runtime bound.

Every criterion logs one PASS/FAIL line; the lines are repeated in the
terminal summary.  Criteria 5-7 share a fresh sextic cache for the session.
"""

import random
import re
import time
from fractions import Fraction

import pytest

from coblelab import cli, heis
from coblelab._solve import common_zeros
from coblelab.coble import (
    CobleParams,
    build_cubic,
    check_fixed_locus_mapping,
    check_minus_relation,
    check_restricted_dual_commutes,
    check_tau_equivariance,
    fixed_loci,
    secant_threefold_degree,
    segre_display,
    segre_groups_rank,
    segre_restriction,
    sigma_degree,
)
from coblelab.dualscan import alpha_star_params, biduality_check, dual_interpolate, singular_scan
from coblelab.fields import GF, QQ
from coblelab.linalg import MatrixF
from coblelab.multipoly import LinearChange, MultiPoly, monomial_basis, substitute_linear


def record(log, n, ok, elapsed, limit, detail):
    within = elapsed < limit
    line = f"criterion {n}: {'PASS' if ok and within else 'FAIL'} ({elapsed:.1f} s, limit {limit:.0f} s) {detail}"
    log.append(line)
    print(line)
    return ok and within


@pytest.fixture(scope="module")
def cache_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("sextic_cache"))


# -- 1 ---------------------------------------------------------------------

def test_criterion_1_invariant_dimensions(acceptance_log):
    t0 = time.perf_counter()
    f = GF(31)
    dims = [len(heis.invariant_subspace(d, f)) for d in (1, 2, 3)]
    B = heis.invariant_subspace(3, f)
    mons = monomial_basis(9, 3)
    span = [[P.terms.get(e, 0) for e in mons] for P in B]
    groups = [[P.terms.get(e, 0) for e in mons] for P in heis.c3_groups(f)]
    same = MatrixF(span, f, raw=True).rank() == MatrixF(span + groups, f, raw=True).rank() == MatrixF(groups, f, raw=True).rank()
    ok = dims == [0, 0, 5] and same
    assert record(acceptance_log, 1, ok, time.perf_counter() - t0, 10, f"dims {dims}, equals C3 span: {same}")


# -- 2 ---------------------------------------------------------------------

def _random_alpha(rng, field):
    while True:
        if field is QQ:
            a = [Fraction(rng.randint(-30, 30), rng.randint(1, 7)) for _ in range(5)]
        else:
            a = [rng.randrange(field.p) for _ in range(5)]
        if any(a):
            return CobleParams(a, field)


@pytest.fixture(scope="module")
def identity_rounds():
    rng = random.Random(2)
    t0 = time.perf_counter()
    rounds = []
    for field in (QQ, GF(31)):
        for _ in range(20):
            params = _random_alpha(rng, field)
            G = build_cubic(params)
            rel = check_minus_relation(params)
            rounds.append({
                "tau_equivariance": bool(check_tau_equivariance(G)),
                "minus_image_in_plus": bool(check_fixed_locus_mapping(G, "-")),
                "plus_image_in_plus": bool(check_fixed_locus_mapping(G, "+")),
                "plus_partials": bool(check_restricted_dual_commutes(G, "+")),
                "relation_printed": bool(rel["literal"]),
                "relation_corrected": bool(rel["corrected"]),
            })
    return rounds, time.perf_counter() - t0


@pytest.mark.xfail(strict=True, reason="the printed linear relation is false for the displayed cubic; see decisions ledger")
def test_criterion_2_symbolic_identities(acceptance_log, identity_rounds):
    rounds, elapsed = identity_rounds
    held = {k: sum(r[k] for r in rounds) for k in rounds[0]}
    ok = all(v == len(rounds) for k, v in held.items() if k != "relation_corrected")
    detail = ", ".join(f"{k} {v}/{len(rounds)}" for k, v in held.items())
    assert record(acceptance_log, 2, ok, elapsed, 30, detail)


def test_criterion_2_with_corrected_relation(acceptance_log, identity_rounds):
    rounds, elapsed = identity_rounds
    keys = [k for k in rounds[0] if k != "relation_printed"]
    ok = all(r[k] for r in rounds for k in keys)
    # the printed relation fails on every draw, not just on special alpha
    never = not any(r["relation_printed"] for r in rounds)
    line = "2 (corrected relation (a0/2)X00+a1X01+a2X10+a3X11+a4X12)"
    assert record(acceptance_log, line, ok and never, elapsed, 30,
                  f"all identities hold on {len(rounds)} draws; printed relation holds on none")


# -- 3 ---------------------------------------------------------------------

def test_criterion_3_segre_formula(acceptance_log):
    t0 = time.perf_counter()
    # both sides are linear in alpha, so the unit vectors settle symbolic alpha
    units = all(
        segre_restriction(CobleParams([int(i == k) for i in range(5)], QQ))
        == segre_display(CobleParams([int(i == k) for i in range(5)], QQ))
        for k in range(5)
    )
    rng = random.Random(3)
    rand = all(segre_restriction(a) == segre_display(a) for a in (_random_alpha(rng, GF(31)) for _ in range(10)))
    rank = segre_groups_rank(QQ)
    ok = units and rand and rank == 5
    assert record(acceptance_log, 3, ok, time.perf_counter() - t0, 5, f"unit alphas {units}, random {rand}, rank {rank}")


# -- 4 ---------------------------------------------------------------------

def test_criterion_4_fixture_alpha(acceptance_log):
    t0 = time.perf_counter()
    S = segre_restriction(alpha_star_params(31))
    polys = S.gradient() + [S]
    # over F_31 the brute-force scan is the oracle for the elimination route
    brute, _ = common_zeros(polys, GF(31), "brute")
    elim, _ = common_zeros(polys, GF(31), "elimination")
    nodes = singular_scan(S, GF(31, 2))
    rational = [pt for pt in nodes if all(x < 31 for x in pt)]
    bi = biduality_check(S, 5, seed=0)
    deg = (bi.detail["dual"]["degree"], (bi.detail.get("double_dual") or {}).get("degree"))
    ok = len(nodes) == 10 and brute == elim == sorted(rational) and deg == (4, 3) and bi.ok
    assert record(acceptance_log, 4, ok, time.perf_counter() - t0, 300,
                  f"nodes over F_961 {len(nodes)} ({len(brute)} rational, brute == elimination: {brute == elim}), "
                  f"dual degree {deg[0]}, double dual degree {deg[1]}, proportional {bi.ok}")


# -- 5 ---------------------------------------------------------------------

def test_criterion_5_coble_duality(acceptance_log, cache_dir):
    t0 = time.perf_counter()
    G = build_cubic(alpha_star_params(10009))
    res = dual_interpolate(G, 6, seed=0, cache_dir=cache_dir)
    F = res.poly
    tau = F is not None and heis.tau_act(F) == F
    inv = F is not None and all(heis.act(g, F) == F for g in heis.generators())
    cols = (len(monomial_basis(9, 5)), len(monomial_basis(9, 6)))
    ok = (
        res.degree == 6 and res.nullity_prev == 0 and res.nullity == 1
        and res.holdout == 500 and res.holdout_ok and cols == (1287, 3003) and tau and inv
        and not res.from_cache
    )
    assert record(acceptance_log, 5, ok, time.perf_counter() - t0, 600,
                  f"degree {res.degree}, nullity {res.nullity_prev} at d=5 ({cols[0]} cols) and {res.nullity} at d=6 "
                  f"({cols[1]} cols), holdout {res.holdout} ok {res.holdout_ok}, tau {tau}, Heisenberg {inv}")


# -- 6 ---------------------------------------------------------------------

def test_criterion_6_hexahedron(acceptance_log, cache_dir):
    t0 = time.perf_counter()
    ok, data = cli.run_hexahedron(cli.RunConfig(samples=600, cache_dir=cache_dir))
    ok = ok and data["gauss_classes"] == 6 and all(data["planes_divide"])
    assert record(acceptance_log, 6, ok, time.perf_counter() - t0, 120,
                  f"Gauss classes {data['gauss_classes']} over {data['field']}, planes divide {data['planes_divide']}")


# -- 7 ---------------------------------------------------------------------

def test_criterion_7_vnr(acceptance_log, cache_dir):
    t0 = time.perf_counter()
    ok, data = cli.run_vnr(cli.RunConfig(heavy=True, cache_dir=cache_dir))
    ig, iq = data.get("igusa_segre_dual", {}), data.get("igusa_quotient", {})

    def pattern(r):
        return (r.get("lines"), r.get("nodes"), set(r.get("nodes_per_line", [])), set(r.get("lines_per_node", [])))

    ok = (
        ok and data["hyperplane"] is not None and data["square_divides"] and data["quotient_matches_segre_dual"]
        and pattern(ig) == pattern(iq) == (15, 15, {3}, {3}) and ig["pass"] and iq["pass"]
    )
    V0 = data["hyperplane"].splitlines()[1:] if data.get("hyperplane") else None
    assert record(acceptance_log, 7, ok, time.perf_counter() - t0, 900,
                  f"V0 terms {V0}, V0^2 divides {data.get('square_divides')}, quotient ~ Segre dual "
                  f"{data.get('quotient_matches_segre_dual')}, (15_3) on quotient {pattern(iq)[:2]}")


# -- 8 ---------------------------------------------------------------------

def test_criterion_8_weddle(acceptance_log):
    t0 = time.perf_counter()
    f = GF(31)
    from coblelab import weddle

    configs = {
        "twisted": cli._weddle_config(weddle.twisted_cubic_points((0, 1, 2, 3, 4, 5), f), 0, (0, 1, 2, 3, 4, 5)),
        "general": cli._weddle_config(weddle.random_six_points(f, 0), 0),
    }
    ok = True
    parts = []
    for name, c in configs.items():
        this = (
            c["pass"] and c["web_dimension"] == 4 and c["weddle_nodes_at_base_points"]
            and c["fibers"]["dominant_size"] == 2 and c["fibers"]["size1_exactly_weddle"]
            and c["secant_images_distinct"] and c["secant_images_singular_on_K"]
            and c["kummer_nodes"]["over_ext"] == 16
        )
        if name == "twisted":
            this = this and c["twisted_cubic"]["proportional"]
        ok = ok and this
        parts.append(f"{name}: histogram {c['fibers']['histogram']}, Kummer nodes {c['kummer_nodes']['over_ext']}")
    assert record(acceptance_log, 8, ok, time.perf_counter() - t0, 600, "; ".join(parts))


# -- 9 ---------------------------------------------------------------------

def test_criterion_9_closed_forms(acceptance_log):
    t0 = time.perf_counter()
    s, d = sigma_degree(5, 4, 2), secant_threefold_degree(6, 2)
    assert record(acceptance_log, 9, (s, d) == (45, 8), time.perf_counter() - t0, 1, f"sigma {s}, secant {d}")


# -- 10 --------------------------------------------------------------------

def _strip_timings(text):
    return re.sub(r'"timings": \{[^}]*\}', '"timings": {}', text)


def test_criterion_10_infrastructure(acceptance_log, tmp_path):
    t0 = time.perf_counter()
    rng = random.Random(10)
    checks = {}

    axioms = True
    for f in (GF(31), GF(10009), GF(31, 2), QQ):
        for _ in range(1000):
            a, b, c = (f(f.random(rng)) for _ in range(3))
            axioms &= (a + b) + c == a + (b + c) and (a * b) * c == a * (b * c) and a * (b + c) == a * b + a * c
            axioms &= a * b == b * a and (a == f(0) or a * a.inverse() == f(1))
    checks["field_axioms"] = axioms

    forms = [build_cubic(_random_alpha(rng, GF(31))) for _ in range(3)]
    forms += [segre_restriction(_random_alpha(rng, GF(31))), build_cubic(_random_alpha(rng, QQ))]
    G = forms[0]
    forms += [G.substitute_linear(fixed_loci(G.field).gamma_plus), G * G]
    euler = True
    for F in forms:
        acc = MultiPoly.zero(F.nvars, F.field)
        for x, g in zip(MultiPoly.variables(F.nvars, F.field), F.gradient()):
            acc = acc + x * g
        euler &= acc == F.scale(F.degree)
    checks["euler"] = euler

    f = GF(31)
    chain = True
    for _ in range(5):
        F = build_cubic(_random_alpha(rng, f)).substitute_linear(fixed_loci(f).gamma_plus)
        A = [[f.random(rng) for _ in range(4)] for _ in range(5)]
        ch = LinearChange(A, f)
        lhs = substitute_linear(F, ch).gradient()
        grads = [g.substitute_linear(ch) for g in F.gradient()]
        for j in range(4):
            acc = MultiPoly.zero(4, f)
            for i in range(5):
                acc = acc + grads[i].scale_raw(A[i][j])
            chain &= lhs[j] == acc
    checks["chain_rule"] = chain

    exact = True
    for fld in (GF(31), GF(31, 2), QQ):
        for _ in range(20):
            r, c = rng.randint(1, 7), rng.randint(1, 9)
            M = MatrixF([[fld.random(rng) if rng.random() < 0.6 else fld.zero() for _ in range(c)] for _ in range(r)], fld, raw=True)
            ns = M.nullspace()
            exact &= M.rank() + len(ns) == c and all(all(fld.is_zero(x) for x in M @ v) for v in ns)
    checks["nullspace"] = exact

    outs = []
    for _ in range(2):
        path = tmp_path / "run.json"
        texts = []
        for check in ("segre", "numbers", "invariants"):
            cli.main([check, "--out", str(path)])
            texts.append(_strip_timings(path.read_text()))
        outs.append(texts)
    checks["deterministic_reports"] = outs[0] == outs[1] and all('"status": "pass"' in t for t in outs[0])

    ok = all(checks.values())
    assert record(acceptance_log, 10, ok, time.perf_counter() - t0, 60, str(checks))
