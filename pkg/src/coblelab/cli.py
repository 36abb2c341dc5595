"""Command-line driver: one subcommand per pipeline, one JSON report per run.

Every pipeline function returns (ok, data).  The report wraps it as
{check, status, data, config, timings}; everything except ``timings`` is a
function of the configuration alone, so two runs can be diffed byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import traceback
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from coblelab import dualscan, heis, weddle
from coblelab._solve import BudgetError, normalize_rows
from coblelab.coble import (
    CobleParams,
    build_cubic,
    check_fixed_locus_mapping,
    check_minus_relation,
    check_restricted_dual_commutes,
    check_tau_equivariance,
    fixed_loci,
    pairing_scale,
    secant_threefold_degree,
    segre_display,
    segre_groups_rank,
    segre_restriction,
    sigma_degree,
)
from coblelab.fields import GF, QQ
from coblelab.multipoly import DivisibilityError, LinearChange, MultiPoly, extract_coordinate_power

HEAVY_BUDGET = 10**8


@dataclass
class RunConfig:
    prime: int | None = None
    ext: int = 2
    alpha: str | None = None
    seed: int = 0
    samples: int | None = None
    max_degree: int = 6
    heavy: bool = False
    cache_dir: str | None = None
    out: str | None = None


class Skipped(Exception):
    pass


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def _alpha_source(cfg: RunConfig) -> tuple[list[int], dict]:
    """Integer alpha from a literal, a fixture file or the shipped fixture."""
    if cfg.alpha and "," in cfg.alpha:
        vals = [int(x) for x in cfg.alpha.split(",")]
        if len(vals) != 5:
            raise ValueError("--alpha takes five comma-separated integers")
        return vals, {"alpha_literal": cfg.alpha}
    path = Path(cfg.alpha) if cfg.alpha else dualscan.ALPHA_STAR_PATH
    raw = path.read_bytes()
    rec = json.loads(raw)
    return [int(a) for a in rec["alpha"]], {"alpha_fixture": path.name, "alpha_fixture_sha256": _sha(raw)}


def _params(cfg: RunConfig, p: int) -> CobleParams:
    alpha, _ = _alpha_source(cfg)
    return CobleParams(alpha, QQ).reduce(GF(p))


def _cache(cfg: RunConfig) -> Path:
    return Path(cfg.cache_dir) if cfg.cache_dir else dualscan.default_cache_dir()


def _sextic(cfg: RunConfig, p: int):
    G = build_cubic(_params(cfg, p))
    return dualscan.dual_interpolate(G, cfg.max_degree, seed=cfg.seed, cache_dir=_cache(cfg))


# -- pipelines -------------------------------------------------------------

def run_invariants(cfg: RunConfig) -> tuple[bool, dict]:
    f = GF(cfg.prime or 31)
    dims = {d: heis.invariant_subspace(d, f) for d in (1, 2, 3)}
    span = dims[3] + heis.c3_groups(f)
    mons = sorted({e for P in span for e in P.terms})
    from coblelab.linalg import MatrixF

    rank = MatrixF([[P.terms.get(e, 0) for e in mons] for P in span], f, raw=True).rank()
    data = {
        "dim_invariant_cubics": len(dims[3]),
        "dim_invariant_linears": len(dims[1]),
        "dim_invariant_quadrics": len(dims[2]),
        "cubics_equal_c3_span": rank == 5,
    }
    ok = len(dims[1]) == 0 and len(dims[2]) == 0 and len(dims[3]) == 5 and rank == 5
    return ok, data


def run_coble_build(cfg: RunConfig) -> tuple[bool, dict]:
    p = cfg.prime or 31
    G = build_cubic(_params(cfg, p))
    inv = heis.is_invariant(G)
    tau = heis.tau_act(G) == G
    data = {
        "field": G.field.to_string(),
        "alpha_mod_p": [int(a.v) if hasattr(a, "v") else int(a) for a in _params(cfg, p).alpha],
        "terms": len(G.terms),
        "heisenberg_invariant": inv["invariant"],
        "tau_invariant": tau,
        "polynomial": G.to_text(),
    }
    return inv["invariant"] and tau, data


def _identity_round(params: CobleParams) -> dict:
    G = build_cubic(params)
    rel = check_minus_relation(params)
    return {
        "tau_equivariance": bool(check_tau_equivariance(G)),
        "plus_to_plus": bool(check_fixed_locus_mapping(G, "+")),
        "minus_to_plus": bool(check_fixed_locus_mapping(G, "-")),
        "minus_relation_corrected": bool(rel["corrected"]),
        "minus_relation_literal": bool(rel["literal"]),
        "restricted_partials_plus": bool(check_restricted_dual_commutes(G, "+")),
        # a cubic vanishes on P^3_-, so the gamma_- square is tested on the even form G^2
        "restricted_partials_minus_even": bool(check_restricted_dual_commutes(G * G, "-")),
    }


def run_identities(cfg: RunConfig) -> tuple[bool, dict]:
    """Seeded random alpha over Q and over F_p."""
    import random

    p = cfg.prime or 31
    draws = cfg.samples or 20
    rng = random.Random(cfg.seed)
    rounds = []
    for field in (QQ, GF(p)):
        for _ in range(draws):
            while True:
                a = [rng.randint(-50, 50) for _ in range(5)]
                if field.kind == "rational" and any(a):
                    break
                if field.kind == "prime" and any(x % p for x in a):
                    break
            r = _identity_round(CobleParams(a, field))
            rounds.append({"field": field.to_string(), "alpha": a, **r})
    keys = [k for k in rounds[0] if k not in ("field", "alpha", "minus_relation_literal")]
    ok = all(r[k] for r in rounds for k in keys)
    data = {
        "draws": len(rounds),
        "all_hold": {k: all(r[k] for r in rounds) for k in keys},
        "literal_relation_holds": sum(r["minus_relation_literal"] for r in rounds),
        "rounds": rounds,
    }
    return ok, data


def run_find_alpha(cfg: RunConfig) -> tuple[bool, dict]:
    rec = dualscan.build_alpha_star(cfg.prime or 31, cfg.seed)
    return True, rec


def run_segre(cfg: RunConfig) -> tuple[bool, dict]:
    p = cfg.prime or 31
    params = _params(cfg, p)
    S = segre_restriction(params)
    display = S == segre_display(params)
    rank = segre_groups_rank(params.field)
    nodes = dualscan.singular_scan(S, GF(p, cfg.ext))
    bi = dualscan.biduality_check(S, 5, cfg.seed)
    data = {
        "field": params.field.to_string(),
        "matches_display": display,
        "groups_rank": rank,
        "scan_field": GF(p, cfg.ext).to_string(),
        "nodes": len(nodes),
        "nodes_over_p": sum(1 for pt in nodes if all(int(x) < p for x in pt)),
        "dual": bi.detail["dual"],
        "double_dual": bi.detail.get("double_dual"),
        "biduality": bi.ok,
    }
    ok = display and rank == 5 and len(nodes) == 10 and bi.ok and bi.detail["dual"]["degree"] == 4
    return ok, data


def run_dual(cfg: RunConfig) -> tuple[bool, dict]:
    p = cfg.prime or 10009
    res = _sextic(cfg, p)
    data = {"field": GF(p).to_string(), **res.summary()}
    if res.poly is None:
        return False, data
    inv = heis.is_invariant(res.poly)
    tau = heis.tau_act(res.poly) == res.poly
    data["tau_invariant"] = tau
    data["heisenberg_invariant"] = inv["invariant"]
    data["heisenberg_failures"] = inv["failures"]
    data["poly_sha256"] = _sha(res.poly.to_text().encode())
    ok = (
        res.degree == 6 and res.nullity == 1 and res.nullity_prev == 0 and res.holdout_ok
        and tau and inv["invariant"]
    )
    return ok, data


def run_hexahedron(cfg: RunConfig) -> tuple[bool, dict]:
    p = cfg.prime or 10009
    res = _sextic(cfg, p)
    if res.poly is None:
        return False, {"sextic": res.summary()}
    R = res.poly.substitute_linear(fixed_loci(res.poly.field).gamma_minus)
    classes, fe = dualscan.gauss_classes(R, cfg.samples or 600, cfg.seed, cfg.ext)
    Re = R.change_field(fe)
    divides = []
    for c in classes:
        try:
            extract_coordinate_power(Re, MultiPoly.linear_form(c, fe, raw=True), 1)
            divides.append(True)
        except DivisibilityError:
            divides.append(False)
    data = {
        "field": fe.to_string(),
        "gauss_classes": len(classes),
        "planes": [list(c) for c in classes],
        "planes_divide": divides,
    }
    return len(classes) == 6 and all(divides), data


def run_vnr(cfg: RunConfig) -> tuple[bool, dict]:
    p = cfg.prime or 31
    if not cfg.heavy:
        raise Skipped(f"exhaustive scans of P^4(F_{p}) and P^4(F_{p}^2) slices exceed {HEAVY_BUDGET} evaluations; pass --heavy")
    f = GF(p)
    params = _params(cfg, p)
    res = _sextic(cfg, p)
    data: dict = {"sextic": res.summary()}
    if res.poly is None:
        return False, data
    R = res.poly.substitute_linear(fixed_loci(f).gamma_plus)
    sing = np.array(dualscan.singular_scan(R, f), dtype=np.int64)
    # the Segre dual read in the coordinates of P^4_+ (gradients carry diag(1,2,2,2,2))
    D = dualscan.dual_interpolate(segre_restriction(params), 5, seed=cfg.seed)
    scale = pairing_scale("+")
    Dd = D.poly.substitute_linear(LinearChange([[scale[i] if i == j else 0 for j in range(5)] for i in range(5)], f))
    lines = weddle.igusa_config_check(Dd, seed=cfg.seed, ext_degree=cfg.ext)
    fe = GF(p, cfg.ext)
    off = sing[~weddle.on_lines(sing, lines.pop("line_spans"), fe)]
    data["singular_points_over_p"] = int(sing.shape[0])
    data["singular_points_off_lines"] = int(off.shape[0])
    try:
        L = dualscan.hyperplane_fit(off, f)
    except dualscan.HyperplaneFitError as exc:
        data["hyperplane"] = None
        data["hyperplane_fit_error"] = str(exc)
        return False, data
    data["hyperplane"] = L.to_text()
    try:
        Q = extract_coordinate_power(R, L, 2)
        data["square_divides"] = True
    except DivisibilityError as exc:
        data["square_divides"] = False
        data["valuation"] = exc.valuation
        return False, data
    data["quotient_matches_segre_dual"] = Q.proportional(Dd)
    data["segre_dual"] = D.summary()
    data["igusa_segre_dual"] = lines
    iq = weddle.igusa_config_check(Q, seed=cfg.seed, ext_degree=cfg.ext)
    iq.pop("line_spans")
    data["igusa_quotient"] = iq
    ok = data["quotient_matches_segre_dual"] and lines["pass"] and data["igusa_quotient"]["pass"]
    return ok, data


def _weddle_config(six: weddle.SixPoints, seed: int, ts=None) -> dict:
    f = six.field
    web = weddle.quadrics_through(six)
    out: dict = {"points": [list(map(int, pt)) for pt in six.pts], "web_dimension": len(web.basis)}
    W = weddle.weddle_quartic(web)
    sing = dualscan.singular_scan(W, f)
    base = sorted(tuple(int(x) for x in r) for r in normalize_rows(np.array(six.pts, dtype=np.int64), f))
    out["weddle_singular_points"] = len(sing)
    out["weddle_nodes_at_base_points"] = sorted(sing) == base
    hist = weddle.fiber_histogram(web)
    out["fibers"] = {k: v for k, v in hist.items() if not k.startswith("_")}
    K, info = weddle.branch_quartic(web, seed)
    out["branch_quartic"] = info
    try:
        sec = weddle.secant_contractions(web)
        gradK = K.gradient()
        out["secant_images_distinct"] = len(set(sec)) == 15
        out["secant_images_singular_on_K"] = all(all(P.eval_raw(list(pt)) == 0 for P in gradK) for pt in sec)
    except weddle.GeneralPositionError as exc:
        out["secant_error"] = str(exc)
        out["secant_images_distinct"] = False
        out["secant_images_singular_on_K"] = False
    node = weddle.sixteenth_node(web, K)
    out["kummer_nodes"] = {k: (v if not isinstance(v, list) else [list(map(int, x)) for x in v]) for k, v in node.items()}
    ok = (
        out["web_dimension"] == 4
        and out["weddle_nodes_at_base_points"]
        and out["fibers"]["dominant_size"] == 2
        and out["fibers"]["size1_exactly_weddle"]
        and out["secant_images_distinct"]
        and out["secant_images_singular_on_K"]
        and node["over_ext"] == 16
    )
    if ts is not None:
        tc = weddle.twisted_cubic_contraction(ts, f)
        out["twisted_cubic"] = {"proportional": tc["proportional"], "image": list(map(int, tc["image"])),
                                "sextic_degree": tc["sextic_degree"]}
        ok = ok and tc["proportional"]
    return {"pass": bool(ok), **out}


def run_weddle(cfg: RunConfig) -> tuple[bool, dict]:
    p = cfg.prime or 31
    f = GF(p)
    ts = (1, 2, 3, 5, 7, 11)
    configs = {
        "twisted_cubic": _weddle_config(weddle.twisted_cubic_points(ts, f), cfg.seed, ts),
        "random": _weddle_config(weddle.random_six_points(f, cfg.seed), cfg.seed),
    }
    return all(c["pass"] for c in configs.values()), configs


def run_numbers(cfg: RunConfig) -> tuple[bool, dict]:
    data = {"sigma_degree": sigma_degree(5, 4, 2), "secant_degree": secant_threefold_degree(6, 2)}
    return data == {"sigma_degree": 45, "secant_degree": 8}, data


PIPELINES: dict[str, Callable[[RunConfig], tuple[bool, dict]]] = {
    "invariants": run_invariants,
    "coble-build": run_coble_build,
    "identities": run_identities,
    "find-alpha": run_find_alpha,
    "segre": run_segre,
    "dual": run_dual,
    "hexahedron": run_hexahedron,
    "vnr": run_vnr,
    "weddle": run_weddle,
    "numbers": run_numbers,
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def run_check(name: str, cfg: RunConfig) -> dict:
    """Run one pipeline and wrap its outcome; module errors become failed checks."""
    config = asdict(cfg)
    try:
        _, fixture = _alpha_source(cfg)
    except (OSError, ValueError) as exc:
        fixture = {"alpha_error": str(exc)}
    config["fixtures"] = fixture
    t0 = time.perf_counter()
    try:
        ok, data = PIPELINES[name](cfg)
        status = "pass" if ok else "fail"
    except Skipped as exc:
        status, data = "skipped", {"reason": str(exc)}
    except BudgetError as exc:
        status, data = "fail", {"error": "BudgetError", "detail": str(exc)}
    except Exception as exc:  # surfaced as a failed check
        status, data = "error", {"error": type(exc).__name__, "detail": str(exc),
                                 "where": traceback.format_exc(limit=-1).strip().splitlines()[-2:]}
    return {
        "check": name,
        "status": status,
        "data": _jsonable(data),
        "config": config,
        "timings": {"seconds": round(time.perf_counter() - t0, 3)},
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=1) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coblelab", description="Finite-field checks on the Coble cubic and sextic.")
    ap.add_argument("check", choices=sorted(PIPELINES) + ["all"])
    ap.add_argument("--prime", type=int, help="working prime (default depends on the check)")
    ap.add_argument("--ext", type=int, default=2, help="extension degree for scans and Gauss classes")
    ap.add_argument("--alpha", help="fixture file or a0,a1,a2,a3,a4 (default: shipped alpha_star.json)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, help="sample count (Gauss classes) or draws (identities)")
    ap.add_argument("--max-degree", type=int, default=6)
    ap.add_argument("--heavy", action="store_true", help=f"allow budgets above {HEAVY_BUDGET:.0e} evaluations")
    ap.add_argument("--cache-dir", default=os.environ.get("COBLE_CACHE"))
    ap.add_argument("--out", help="write the report(s) here instead of stdout")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.prime, args.ext, args.alpha, args.seed, args.samples, args.max_degree,
                    args.heavy, args.cache_dir, args.out)
    names = [n for n in PIPELINES if n != "find-alpha"] if args.check == "all" else [args.check]
    reports = [run_check(n, cfg) for n in names]
    text = "".join(dumps(r) for r in reports)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r["status"] == "pass" for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
