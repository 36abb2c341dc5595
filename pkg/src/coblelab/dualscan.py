"""Finite-field laboratory for dual hypersurfaces.

Smooth points are drawn on a hypersurface by pinning all coordinates but one
and solving for the last; their normalised gradients are points of the dual
variety.  The dual equation is the lowest-degree form vanishing on enough of
those images (a nullspace of a monomial evaluation matrix).  Also here:
counting gradient classes, exhaustive singular scans, hyperplane fitting and
the search for a distinguished parameter alpha.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import ceil, comb, gcd
from pathlib import Path
from typing import Sequence

import numpy as np

from coblelab import _solve
from coblelab._solve import BudgetError, normalize_rows
from coblelab.coble import CobleParams, Verdict, build_cubic, fixed_loci, segre_restriction
from coblelab.fields import GF, QQ, FieldError, FieldSpec, roots_raw
from coblelab.linalg import MatrixF
from coblelab.multipoly import LinearChange, MultiPoly, eval_monomials, monomial_basis

log = logging.getLogger(__name__)

__all__ = [
    "HypersurfaceSamples",
    "SamplingError",
    "DualResult",
    "HyperplaneFitError",
    "BudgetError",
    "sample_points",
    "dual_interpolate",
    "gauss_classes",
    "gauss_class_count",
    "singular_scan",
    "find_special_alpha",
    "alpha_checks",
    "burkhardt_value",
    "hex_base_points",
    "lift_alpha",
    "build_alpha_star",
    "load_alpha_star",
    "alpha_star_params",
    "alpha_from_base_point",
    "hyperplane_fit",
    "dominant_hyperplane",
    "biduality_check",
    "default_cache_dir",
]

HOLDOUT = 500


class SamplingError(RuntimeError):
    pass


class HyperplaneFitError(ValueError):
    def __init__(self, dim: int):
        super().__init__(f"common hyperplane space has dimension {dim}, expected 1")
        self.dim = dim


# -- sampling ---------------------------------------------------------------

@dataclass
class HypersurfaceSamples:
    F: MultiPoly
    field: FieldSpec
    seed: int
    points: np.ndarray  # (N, n) raw codes, normalised
    images: np.ndarray  # (N, n) normalised gradients

    def __len__(self):
        return self.points.shape[0]

    @property
    def pairs(self):
        return list(zip(map(tuple, self.points.tolist()), map(tuple, self.images.tolist())))


class _SampleStream:
    """Deterministic stream of smooth points of {F = 0} with their gradient images."""

    def __init__(self, F: MultiPoly, seed: int, distinct: bool = True):
        f = F.field
        if not f.is_finite:
            raise FieldError("sampling needs a finite field")
        if F.is_zero():
            raise ValueError("cannot sample the zero polynomial")
        self.F = F
        self.f = f
        self.seed = seed
        self.distinct = distinct
        self.rng = random.Random(seed)
        self.grad = F.gradient()
        self.points: list[tuple] = []
        self.images: list[tuple] = []
        self.seen: set = set()
        self.lines = 0

    def _normalize(self, v: list) -> tuple | None:
        f = self.f
        lead = next((x for x in v if x), None)
        if lead is None:
            return None
        inv = f.inv(lead)
        return tuple(f.mul(x, inv) for x in v)

    def _restrict(self, vals: list, j: int) -> list:
        f = self.f
        coeffs: dict = {}
        for e, c in self.F.terms.items():
            v = c
            for i, k in enumerate(e):
                if k and i != j:
                    v = f.mul(v, f.pow(vals[i], k))
                    if v == 0:
                        break
            if v:
                coeffs[e[j]] = f.add(coeffs.get(e[j], f.zero()), v)
        if not coeffs:
            return []
        deg = max(coeffs)
        c = [coeffs.get(i, f.zero()) for i in range(deg + 1)]
        while c and f.is_zero(c[-1]):
            c.pop()
        return c

    def fill(self, count: int):
        f = self.f
        n = self.F.nvars
        budget = 10 * count
        while len(self.points) < count:
            if self.lines >= budget:
                raise SamplingError(
                    f"only {len(self.points)} smooth points after {self.lines} lines; "
                    "the hypersurface may be degenerate over this field"
                )
            self.lines += 1
            j = self.rng.randrange(n)
            vals = [f.random(self.rng) for _ in range(n)]
            c = self._restrict(vals, j)
            if len(c) <= 1:
                continue  # constant along the line: no roots, or the line lies inside
            for r in roots_raw(c, f, seed=self.rng.randrange(1 << 30)):
                vals[j] = r
                pt = self._normalize(vals)
                if pt is None or (self.distinct and pt in self.seen):
                    continue
                g = [P.eval_raw(list(pt)) for P in self.grad]
                img = self._normalize(g)
                if img is None:
                    continue  # singular point
                self.seen.add(pt)
                self.points.append(pt)
                self.images.append(img)
                if len(self.points) >= count:
                    break

    def take(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        self.fill(stop)
        n = self.F.nvars
        P = np.array(self.points[start:stop], dtype=np.int64).reshape(-1, n)
        I = np.array(self.images[start:stop], dtype=np.int64).reshape(-1, n)
        return P, I


def sample_points(F: MultiPoly, count: int, seed: int, distinct: bool = True) -> HypersurfaceSamples:
    """``count`` smooth points (pairwise distinct unless ``distinct=False``)."""
    s = _SampleStream(F, seed, distinct)
    P, I = s.take(0, count)
    return HypersurfaceSamples(F, F.field, seed, P, I)


# -- dual interpolation -----------------------------------------------------

@dataclass
class DualResult:
    degree: int | None
    poly: MultiPoly | None
    nullity: int
    nullity_prev: int | None
    rows: int
    rows_prev: int | None
    holdout_ok: bool
    holdout: int
    seed: int
    oversample: float
    warnings: list = dc_field(default_factory=list)
    from_cache: bool = False

    @property
    def status(self) -> str:
        if self.degree is None:
            return "degree exceeds d_max"
        return "warning" if self.warnings else "ok"

    def summary(self) -> dict:
        return {
            "degree": self.degree,
            "nullity": self.nullity,
            "nullity_prev": self.nullity_prev,
            "rows": self.rows,
            "rows_prev": self.rows_prev,
            "holdout": self.holdout,
            "holdout_ok": self.holdout_ok,
            "terms": len(self.poly.terms) if self.poly is not None else 0,
            "status": self.status,
            "warnings": list(self.warnings),
        }


def default_cache_dir() -> Path:
    return Path(os.environ.get("COBLE_CACHE", Path.home() / ".cache" / "coblelab"))


def _cache_key(F: MultiPoly, d_max: int, oversample: float, seed: int, holdout: int) -> str:
    h = hashlib.sha256()
    h.update(F.to_text().encode())
    h.update(f"|{d_max}|{oversample!r}|{seed}|{holdout}".encode())
    return h.hexdigest()[:20]


def _nullspace(M: np.ndarray, f: FieldSpec) -> list[list]:
    if f.kind == "prime":
        return MatrixF(M, f).nullspace()
    return MatrixF(M.tolist(), f, raw=True).nullspace()


def dual_interpolate(
    F: MultiPoly,
    d_max: int,
    oversample: float = 1.1,
    seed: int = 0,
    holdout: int = HOLDOUT,
    cache_dir: str | Path | None = None,
) -> DualResult:
    """Lowest-degree form vanishing on the gradient images of smooth points of F = 0.

    Degree d uses the first ceil(oversample * C(n+d-1, d)) samples of one
    seeded stream; an accepted form is then checked on the next ``holdout``
    samples.  A trivial nullspace at degree d-1 with that many rows implies a
    trivial nullspace with any larger row count.
    """
    if oversample < 1.05:
        raise ValueError("oversample must be at least 1.05")
    f = F.field
    n = F.nvars
    key = _cache_key(F, d_max, oversample, seed, holdout)
    if cache_dir is not None:
        cache = Path(cache_dir)
        poly_path, meta_path = cache / f"dual_{key}.poly", cache / f"dual_{key}.json"
        if poly_path.exists() and meta_path.exists():
            meta = json.loads(meta_path.read_text())
            poly = MultiPoly.from_text(poly_path.read_text())
            return DualResult(
                meta["degree"], poly, meta["nullity"], meta["nullity_prev"], meta["rows"], meta["rows_prev"],
                meta["holdout_ok"], meta["holdout"], meta["seed"], meta["oversample"], meta["warnings"], True,
            )
    stream = _SampleStream(F, seed)
    prev_null, prev_rows = None, None
    result = None
    for d in range(1, d_max + 1):
        mons = monomial_basis(n, d)
        rows = ceil(oversample * len(mons))
        _, imgs = stream.take(0, rows)
        M = eval_monomials(imgs, mons, f)
        ns = _nullspace(M, f)
        log.info("degree %d: %d x %d system, nullity %d", d, rows, len(mons), len(ns))
        if not ns:
            prev_null, prev_rows = 0, rows
            continue
        warnings = []
        if len(ns) > 1:
            warnings.append(f"nullspace dimension {len(ns)} at degree {d}: samples insufficient or dual not a hypersurface")
        v = ns[0]
        poly = MultiPoly(n, {e: c for e, c in zip(mons, v) if not f.is_zero(c)}, f, _trusted=True).normalized()
        _, hold = stream.take(rows, rows + holdout)
        vals = poly.eval_many(hold) if f.is_finite else None
        ok = bool((vals == 0).all())
        if not ok:
            warnings.append("candidate does not vanish on held-out gradient images")
        result = DualResult(d, poly, len(ns), prev_null, rows, prev_rows, ok, holdout, seed, oversample, warnings)
        break
    if result is None:
        result = DualResult(None, None, 0, prev_null, 0, prev_rows, False, holdout, seed, oversample,
                            [f"no form of degree <= {d_max}"])
    if cache_dir is not None and result.poly is not None:
        cache.mkdir(parents=True, exist_ok=True)
        poly_path.write_text(result.poly.to_text())
        meta = {
            "field": f.to_string(),
            "seed": seed,
            "oversample": oversample,
            "samples": result.rows + holdout,
            "degree": result.degree,
            "nullity": result.nullity,
            "nullity_prev": result.nullity_prev,
            "rows": result.rows,
            "rows_prev": result.rows_prev,
            "holdout": holdout,
            "holdout_ok": result.holdout_ok,
            "warnings": result.warnings,
        }
        meta_path.write_text(json.dumps(meta, indent=1, sort_keys=True))
    return result


# -- Gauss classes ----------------------------------------------------------

def _over(F: MultiPoly, ext_degree: int) -> MultiPoly:
    f = F.field
    if ext_degree == 1:
        return F
    if f.kind != "prime":
        raise FieldError("extension sampling starts from a prime field")
    return F.change_field(GF(f.p, ext_degree))


def gauss_classes(F: MultiPoly, samples: int, seed: int, ext_degree: int = 1) -> tuple[list[tuple], FieldSpec]:
    """Distinct normalised gradient directions over ``samples`` smooth points."""
    Fe = _over(F, ext_degree)
    s = sample_points(Fe, samples, seed, distinct=False)
    classes = sorted(set(map(tuple, s.images.tolist())))
    return classes, Fe.field


def gauss_class_count(F: MultiPoly, samples: int, seed: int, ext_degree: int = 1) -> int:
    return len(gauss_classes(F, samples, seed, ext_degree)[0])


# -- singular loci ----------------------------------------------------------

def singular_scan(F: MultiPoly, field: FieldSpec | None = None, method: str = "auto") -> list[tuple]:
    """All points of P^n(field) where every partial of F vanishes.

    Small ambient spaces are scanned exhaustively; larger ones go through the
    elimination engine (exact, needs coefficients in the prime field).
    """
    field = field or F.field
    if F.nvars - 1 > 4:
        raise ValueError("ambient dimension must be at most 4")
    polys = [P for P in F.gradient() if not P.is_zero()]
    if not polys:
        raise ValueError("F is constant")
    # F itself is added so characteristic-p Euler failures cannot add points
    pts, _ = _solve.common_zeros(polys + [F], field, method)
    return pts


# -- the distinguished parameter --------------------------------------------

_MINUS_COMPONENTS = ("00", "01", "10", "11", "12")


def base_point_matrix(z: Sequence) -> list[list[Fraction]]:
    """5x5 matrix N(z): the listed polar components at gamma_-(z) are N(z) alpha."""
    from coblelab.heis import index_of

    gm = fixed_loci(QQ).gamma_minus
    x = gm.apply(z)
    cols = []
    for i in range(5):
        e = [0] * 5
        e[i] = 1
        grad = build_cubic(CobleParams(e, QQ)).gradient()
        cols.append([grad[index_of((int(s[0]), int(s[1])))](x).v for s in _MINUS_COMPONENTS])
    return [[cols[j][i] for j in range(5)] for i in range(5)]


def alpha_from_base_point(z: Sequence[int]) -> list[int] | None:
    """Primitive integer alpha for which the polar components vanish at gamma_-(z).

    Returns None unless the kernel is one-dimensional.
    """
    ns = MatrixF(base_point_matrix(z), QQ).nullspace()
    if len(ns) != 1:
        return None
    v = [Fraction(x) for x in ns[0]]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return [-x for x in ints] if lead < 0 else ints


def web_polys(params: CobleParams) -> list[MultiPoly]:
    """The five polar components restricted to P^3_-, as quadrics in Z."""
    from coblelab.heis import index_of

    G = build_cubic(params)
    gm = fixed_loci(params.field).gamma_minus
    grad = G.gradient()
    return [grad[index_of((int(s[0]), int(s[1])))].substitute_linear(gm) for s in _MINUS_COMPONENTS]


def looks_irreducible(G: MultiPoly, seed: int, planes: int = 20) -> tuple[bool, int]:
    """True once some random plane section is smooth (over the quadratic extension)."""
    f = G.field
    rng = random.Random(seed)
    fe = GF(f.p, 2)
    for t in range(planes):
        A = [[f.random(rng) for _ in range(3)] for _ in range(G.nvars)]
        try:
            ch = LinearChange(A, f, embedding=True)
        except ValueError:
            continue
        C = G.substitute_linear(ch)
        if C.is_zero():
            continue
        if not singular_scan(C, fe):
            return True, t + 1
    return False, planes


def burkhardt_value(alpha: Sequence, f: FieldSpec):
    """a0^4 + 8 a0 (a1^3 + a2^3 + a3^3 + a4^3) + 48 a1 a2 a3 a4 over f.

    Genuine parameters lie on this quartic, and so does every 10-nodal alpha
    found mod 31.  Off it, restrictions with 1 to 4 nodes are common.
    """
    a = [f.coerce(x) for x in alpha]
    cubes = f.sum([f.pow(x, 3) for x in a[1:]])
    t = f.add(f.pow(a[0], 4), f.mul(f.coerce(8), f.mul(a[0], cubes)))
    return f.add(t, f.mul(f.coerce(48), f.mul(f.mul(a[1], a[2]), f.mul(a[3], a[4]))))


def alpha_checks(alpha: Sequence[int], p: int, seed: int = 0) -> dict:
    """Node count of the Segre restriction over F_{p^2} and the plane-section test.

    The F_p scan runs first: more than 10 rational singular points means a
    singular curve, and the extension scan is skipped.
    """
    f = GF(p)
    params = CobleParams([int(a) % p for a in alpha], f)
    res: dict = {"alpha_mod_p": [int(a) % p for a in alpha]}
    S = segre_restriction(params)
    base = singular_scan(S, f)
    res["segre_nodes_over_p"] = len(base)
    if len(base) > 10:
        res["segre_nodes"] = None
        return res
    nodes = singular_scan(S, GF(p, 2))
    res["segre_nodes"] = len(nodes)
    if len(nodes) != 10:
        return res
    ok, tries = looks_irreducible(build_cubic(params), seed)
    res["irreducible_looking"] = ok
    res["plane_sections_tried"] = tries
    return res


def _reason(chk: dict) -> str:
    if chk.get("segre_nodes") is None:
        return "singular_curve_over_p"
    if chk["segre_nodes"] != 10:
        return "segre_nodes_%d" % chk["segre_nodes"]
    return "reducible_looking"


def _normalize(v: Sequence[int], p: int) -> list[int]:
    lead = next(x for x in v if x % p)
    inv = pow(lead, -1, p)
    return [x * inv % p for x in v]


def find_special_alpha(
    p: int,
    seed: int,
    max_candidates: int = 10**5,
    prefilter: bool = False,
) -> tuple[CobleParams, dict]:
    """Seeded random search for alpha in P^4(F_p) with a 10-nodal Segre restriction.

    A candidate is accepted when the restriction has exactly 10 singular
    points over F_{p^2} and a random plane section of the full cubic is
    smooth.  With ``prefilter`` only draws on the Burkhardt quartic are
    scanned and the others are rejected unscanned.  This is a heuristic: for
    p = 31, seed 2026 both searches return the same alpha.
    """
    if p % 3 != 1:
        raise FieldError(f"p = {p} is not 1 mod 3, so the field has no cube root of unity")
    if p > 64:
        raise BudgetError(f"p = {p} exceeds the scan budget (p <= 64)", p)
    f = GF(p)
    rng = random.Random(seed)
    rejected: dict = {}
    for n in range(1, max_candidates + 1):
        alpha = [rng.randrange(p) for _ in range(5)]
        if not any(alpha):
            continue
        alpha = _normalize(alpha, p)
        if prefilter and not f.is_zero(burkhardt_value(alpha, f)):
            rejected["off_burkhardt"] = rejected.get("off_burkhardt", 0) + 1
            continue
        chk = alpha_checks(alpha, p, seed)
        if chk.get("segre_nodes") == 10 and chk.get("irreducible_looking", False):
            prov = {
                "seed": seed,
                "method": "uniform draws from P^4(F_p)" + (", Burkhardt prefilter" if prefilter else ""),
                "candidates_tried": n,
                "rejected": dict(sorted(rejected.items())),
                "checks": chk,
                "criteria": {"segre_nodes_over_Fp2": 10, "smooth_plane_section": True},
            }
            return CobleParams(alpha, f), prov
        log.info("alpha %s rejected: %s", alpha, chk)
        reason = _reason(chk)
        rejected[reason] = rejected.get(reason, 0) + 1
    raise RuntimeError(f"no special alpha among {max_candidates} candidates for p = {p}, seed = {seed}")


def hex_base_points(alpha: Sequence[int], q: int) -> int:
    """Number of base points over F_{q^2} of the web of polar quadrics on P^3_-."""
    params = CobleParams([int(a) % q for a in alpha], GF(q))
    base, _ = _solve.common_zeros(web_polys(params), GF(q, 2), "elimination")
    return len(base)


def lift_alpha(alpha_p: Sequence[int], p: int, q: int = 10009, seed: int = 0, zbound: int = 40,
               max_candidates: int = 1000) -> tuple[list[int], dict]:
    """Integer alpha agreeing with ``alpha_p`` mod p and genuine mod q.

    Mod q the target is alpha(z), the kernel vector of N(z) for a random
    integer point z of P^3_-, with all six web base points over F_{q^2} (the
    six planes of the hexahedron are then visible over that field).  The two
    residue vectors are normalised to a0 = 1 and combined coordinatewise by
    the Chinese remainder theorem.
    """
    ap = _normalize([int(a) for a in alpha_p], p)
    if ap[0] != 1:
        raise ValueError("alpha_p needs a0 != 0 mod p")
    rng = random.Random(seed)
    tried = 0
    counts: dict = {}
    while tried < max_candidates:
        z = [rng.randint(-zbound, zbound) for _ in range(4)]
        if not any(z):
            continue
        tried += 1
        a = alpha_from_base_point(z)
        if a is None or a[0] % q == 0:
            continue
        nb = hex_base_points(a, q)
        counts[nb] = counts.get(nb, 0) + 1
        if nb != 6:
            continue
        aq = _normalize(a, q)
        m = p * q
        lifted = [(x * q * pow(q, -1, p) + y * p * pow(p, -1, q)) % m for x, y in zip(ap, aq)]
        return lifted, {
            "q": q,
            "base_point": z,
            "alpha_from_base_point": a,
            "candidates_tried": tried,
            "base_point_counts": {str(k): v for k, v in sorted(counts.items())},
        }
    raise RuntimeError(f"no alpha(z) with 6 base points over F_{q}^2 among {tried} draws")


ALPHA_STAR_PATH = Path(__file__).with_name("data") / "alpha_star.json"


def build_alpha_star(p: int = 31, seed: int = 2026, q: int = 10009) -> dict:
    """Run the search mod p and the lift mod q; the fixture record."""
    params, prov = find_special_alpha(p, seed)
    residues = [int(x) for x in prov["checks"]["alpha_mod_p"]]
    lifted, lift_prov = lift_alpha(residues, p, q, seed)
    return {
        "field": GF(p).to_string(),
        "residues": residues,
        "alpha": lifted,
        "residues_mod": {str(p): residues, str(q): [a % q for a in lifted]},
        "provenance": {"search": prov, "lift": lift_prov},
    }


def load_alpha_star(path: str | Path | None = None) -> dict:
    return json.loads(Path(path or ALPHA_STAR_PATH).read_text())


def alpha_star_params(p: int, path: str | Path | None = None) -> CobleParams:
    """The fixture alpha reduced mod p (the integer lift covers every prime)."""
    rec = load_alpha_star(path)
    return CobleParams(rec["alpha"], QQ).reduce(GF(p))


# -- hyperplanes ------------------------------------------------------------

def hyperplane_fit(points: Sequence[Sequence] | np.ndarray, field: FieldSpec) -> MultiPoly:
    """The unique linear form vanishing at all points (raw codes)."""
    pts = np.asarray(points, dtype=np.int64)
    if field.kind == "prime":
        ns = MatrixF(pts, field).nullspace()
    else:
        ns = MatrixF(pts.tolist(), field, raw=True).nullspace()
    if len(ns) != 1:
        raise HyperplaneFitError(len(ns))
    return MultiPoly.linear_form(ns[0], field, raw=True).normalized()


def dominant_hyperplane(points: np.ndarray, field: FieldSpec, seed: int = 0, trials: int = 200):
    """Hyperplane containing the most points, found from random n-subsets.

    Returns (form, inlier mask).  The form is refitted on all inliers by
    :func:`hyperplane_fit`, so it is exact whenever the inliers span it.
    """
    pts = np.asarray(points, dtype=np.int64)
    N, n = pts.shape
    rng = random.Random(seed)
    best = None
    for _ in range(trials):
        idx = rng.sample(range(N), n - 1)
        try:
            L = hyperplane_fit(pts[idx], field)
        except HyperplaneFitError:
            continue
        coeffs = np.array([L.terms.get(tuple(int(i == j) for i in range(n)), 0) for j in range(n)], dtype=np.int64)
        vals = np.zeros(N, dtype=np.int64)
        for j in range(n):
            vals = field.vadd(vals, field.vmul(pts[:, j], np.full(N, coeffs[j], dtype=np.int64)))
        mask = vals == 0
        if best is None or mask.sum() > best[1].sum():
            best = (L, mask)
        if mask.sum() > N // 2:
            break
    if best is None:
        raise HyperplaneFitError(0)
    L, mask = best
    return hyperplane_fit(pts[mask], field), mask


# -- biduality --------------------------------------------------------------

def biduality_check(F: MultiPoly, d_max: int, seed: int, oversample: float = 1.1) -> Verdict:
    first = dual_interpolate(F, d_max, oversample, seed)
    if first.poly is None:
        return Verdict(False, {"dual": first.summary()})
    second = dual_interpolate(first.poly, d_max, oversample, seed + 1)
    ok = second.poly is not None and second.poly.proportional(F)
    return Verdict(ok, {"dual": first.summary(), "double_dual": second.summary(), "proportional": ok})
