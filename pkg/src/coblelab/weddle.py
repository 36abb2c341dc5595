"""Six points in P^3, the web of quadrics through them, and its 2:1 map.

The web map P^3 --> P^3 is generically 2:1.  Its ramification surface is the
Weddle quartic (the Jacobian determinant of the web), its branch surface a
Kummer quartic.  The 15 lines through pairs of base points and the twisted
cubic through all six are contracted to the 16 nodes of the Kummer quartic.

Also here: the check of the (15_3) configuration of lines and nodes in the
singular locus of a quartic threefold.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from math import ceil
from typing import Sequence

import numpy as np

from coblelab import _solve
from coblelab._solve import BudgetError, iter_projective_chunks, normalize_rows
from coblelab.dualscan import SamplingError, _SampleStream, singular_scan
from coblelab.fields import GF, FieldSpec, upoly_trim
from coblelab.linalg import MatrixF
from coblelab.multipoly import MultiPoly, eval_monomials, monomial_basis

__all__ = [
    "GeneralPositionError",
    "SixPoints",
    "QuadricWeb",
    "twisted_cubic_points",
    "random_six_points",
    "quadrics_through",
    "web_image",
    "weddle_quartic",
    "map_fibers",
    "fiber_histogram",
    "branch_quartic",
    "secant_contractions",
    "sixteenth_node",
    "twisted_cubic_contraction",
    "igusa_config_check",
    "on_lines",
]

FIBER_PRIME_LIMIT = 64


class GeneralPositionError(ValueError):
    def __init__(self, msg: str, subset: tuple = ()):
        super().__init__(msg)
        self.subset = subset


def _det(rows: list[list], f: FieldSpec):
    if len(rows) == 1:
        return rows[0][0]
    acc = f.zero()
    for j, c in enumerate(rows[0]):
        t = f.mul(c, _det([r[:j] + r[j + 1:] for r in rows[1:]], f))
        acc = f.sub(acc, t) if j % 2 else f.add(acc, t)
    return acc


@dataclass
class SixPoints:
    pts: list  # six 4-tuples of raw codes
    field: FieldSpec
    general_position: bool = False

    @classmethod
    def make(cls, pts: Sequence[Sequence], field: FieldSpec, check: bool = True) -> "SixPoints":
        raw = [tuple(field.coerce(x) for x in p) for p in pts]
        if len(raw) != 6 or any(len(p) != 4 for p in raw):
            raise ValueError("six points of P^3 expected")
        sp = cls(raw, field)
        if check:
            sp.verify()
        return sp

    def verify(self):
        f = self.field
        for quad in itertools.combinations(range(6), 4):
            if f.is_zero(_det([list(self.pts[i]) for i in quad], f)):
                raise GeneralPositionError(f"points {quad} are coplanar (or repeated)", quad)
        self.general_position = True

    def to_json(self) -> dict:
        return {"field": self.field.to_string(), "points": [list(map(int, p)) for p in self.pts]}


@dataclass
class QuadricWeb:
    basis: list  # four quadrics in 4 variables
    source: SixPoints

    @property
    def field(self) -> FieldSpec:
        return self.source.field


def twisted_cubic_points(ts: Sequence, field: FieldSpec) -> SixPoints:
    ts = [field.coerce(t) for t in ts]
    if len(set(ts)) != len(ts):
        raise ValueError("parameters must be distinct")
    pts = [(field.one(), t, field.pow(t, 2), field.pow(t, 3)) for t in ts]
    return SixPoints.make(pts, field)


def random_six_points(field: FieldSpec, seed: int) -> SixPoints:
    rng = random.Random(seed)
    while True:
        pts = [[field.random(rng) for _ in range(4)] for _ in range(6)]
        try:
            return SixPoints.make(pts, field)
        except GeneralPositionError:
            continue


def quadrics_through(six: SixPoints, check: bool = True) -> QuadricWeb:
    """The web of quadrics through six points (nullspace of the 6x10 evaluation matrix).

    ``check=False`` skips the general-position test; used only to build the
    degenerate fixtures that exercise downstream error paths.
    """
    if check and not six.general_position:
        six.verify()
    f = six.field
    mons = monomial_basis(4, 2)
    rows = [[_mono(p, e, f) for e in mons] for p in six.pts]
    ns = MatrixF(rows, f, raw=True).nullspace()
    if len(ns) != 4:
        raise GeneralPositionError(f"quadrics through the points form a space of dimension {len(ns)}, not 4")
    basis = [MultiPoly(4, {e: c for e, c in zip(mons, v) if not f.is_zero(c)}, f, _trusted=True) for v in ns]
    return QuadricWeb(basis, six)


def _mono(p, e, f):
    v = f.one()
    for x, k in zip(p, e):
        if k:
            v = f.mul(v, f.pow(x, k))
    return v


def web_image(web: QuadricWeb, pt: Sequence) -> tuple | None:
    """Normalised image of a point (raw codes), None on the base locus."""
    f = web.field
    v = [Q.eval_raw(list(pt)) for Q in web.basis]
    lead = next((x for x in v if x), None)
    if lead is None:
        return None
    inv = f.inv(lead)
    return tuple(f.mul(x, inv) for x in v)


def weddle_quartic(web: QuadricWeb) -> MultiPoly:
    """det(dQ_i/dx_j): the ramification quartic of the web map."""
    f = web.field
    J = [[Q.diff(j) for j in range(4)] for Q in web.basis]

    def det(rows):
        if len(rows) == 1:
            return rows[0][0]
        acc = MultiPoly.zero(4, f)
        for j in range(len(rows)):
            minor = det([r[:j] + r[j + 1:] for r in rows[1:]])
            term = rows[0][j] * minor
            acc = acc - term if j % 2 else acc + term
        return acc

    W = det(J)
    if W.is_zero():
        raise GeneralPositionError("the Jacobian determinant of the web vanishes identically")
    return W


def _exceptional_planes(web: QuadricWeb) -> list[list]:
    """Image plane of the exceptional divisor over each base point (linear form coefficients).

    Near P_i the web is Q(P_i + e v) = e <grad Q(P_i), v> + O(e^2), so E_i maps
    onto the column space of the 4x4 matrix with rows grad Q_k(P_i); its left
    kernel is the plane.
    """
    f = web.field
    out = []
    for p in web.source.pts:
        J = [[Q.diff(j).eval_raw(list(p)) for j in range(4)] for Q in web.basis]
        Jt = [[J[k][j] for k in range(4)] for j in range(4)]
        ns = MatrixF(Jt, f, raw=True).nullspace()
        if len(ns) != 1:
            raise GeneralPositionError("base point is not a simple base point of the web")
        out.append(ns[0])
    return out


def map_fibers(forms: Sequence[MultiPoly], field: FieldSpec) -> dict:
    """Group all points of P^(n-1)(F_q) off the base locus by their image under ``forms``."""
    n = forms[0].nvars
    pts = np.concatenate(list(iter_projective_chunks(n, field.q)))
    vals = np.stack([Q.eval_many(pts) for Q in forms], axis=1)
    ok = vals.any(axis=1)
    pts, vals = pts[ok], vals[ok]
    uniq, inverse, counts = np.unique(normalize_rows(vals, field), axis=0, return_inverse=True, return_counts=True)
    return {"points": pts, "images": uniq, "image_index": inverse.reshape(-1), "counts": counts}


def _histogram(counts: np.ndarray) -> dict:
    return {int(k): int(v) for k, v in zip(*np.unique(counts, return_counts=True))}


def fiber_histogram(web: QuadricWeb, p: int | None = None, detail: bool = False) -> dict:
    """Exhaustive fiber sizes of the web map over P^3(F_p).

    Two counts are kept per image point: ``naive`` counts preimages off the
    base locus; ``histogram`` also counts a preimage on the exceptional
    divisor over P_i whenever the image lies in that divisor's image plane,
    i.e. fibers of the map on the blow-up at the six points.  Without that
    correction the quadric cone through P_i and the other five points (whose
    partner points sit on the exceptional divisor) shows up as spurious
    size-1 fibers off the Weddle quartic.
    """
    f = web.field
    if f.kind != "prime":
        raise ValueError("fiber histograms are computed over a prime field")
    if p is not None and p != f.p:
        raise ValueError("p must be the characteristic of the web's field")
    if f.p > FIBER_PRIME_LIMIT:
        raise BudgetError(f"p = {f.p} exceeds the exhaustive budget p <= {FIBER_PRIME_LIMIT}", f.p**3)
    fib = map_fibers(web.basis, f)
    uniq, counts = fib["images"], fib["counts"]
    extra = np.zeros(uniq.shape[0], dtype=np.int64)
    for L in _exceptional_planes(web):
        ev = np.zeros(uniq.shape[0], dtype=np.int64)
        for j in range(4):
            ev = f.vadd(ev, f.vmul(uniq[:, j], np.full(uniq.shape[0], L[j], dtype=np.int64)))
        extra += ev == 0
    blown = counts + extra
    hist = _histogram(blown)
    # ramification check against the Jacobian determinant
    W = weddle_quartic(web)
    pts = fib["points"]
    on_w = W.eval_many(pts) == 0
    per_point = blown[fib["image_index"]]
    contracted = per_point > 2
    out = {
        "p": f.p,
        "points_off_base": int(pts.shape[0]),
        "images": int(uniq.shape[0]),
        "histogram": hist,
        "naive": _histogram(counts),
        "dominant_size": max(hist.items(), key=lambda kv: kv[1])[0],
        "size1_points": int((per_point == 1).sum()),
        "size1_off_weddle": int(((per_point == 1) & ~on_w).sum()),
        "weddle_points": int(on_w.sum()),
        "weddle_points_not_size1": int((on_w & (per_point != 1) & ~contracted).sum()),
        "points_on_contracted_curves": int(contracted.sum()),
        "contracted_off_weddle": int((contracted & ~on_w).sum()),
    }
    out["size1_exactly_weddle"] = out["size1_off_weddle"] == 0 and out["weddle_points_not_size1"] == 0
    if detail:
        out["_fibers"] = fib
        out["_blown_counts"] = blown
    return out


def _interpolate_on(images: np.ndarray, d: int, f: FieldSpec) -> list:
    mons = monomial_basis(images.shape[1], d)
    M = eval_monomials(images, mons, f)
    return MatrixF(M, f).nullspace(), mons


def branch_quartic(web: QuadricWeb, seed: int, samples: int = 40, check: int = 20) -> tuple[MultiPoly, dict]:
    """Quartic through the images of sampled smooth Weddle points (images made distinct)."""
    f = web.field
    W = weddle_quartic(web)
    stream = _SampleStream(W, seed)
    need = max(samples, ceil(1.1 * 35)) + check
    seen: dict = {}
    taken = 0
    while len(seen) < need:
        try:
            stream.fill(taken + 50)
        except SamplingError:
            break
        for pt in stream.points[taken:]:
            img = web_image(web, pt)
            if img is not None and img not in seen:
                seen[img] = pt
        taken = len(stream.points)
    imgs = np.array(list(seen.keys()), dtype=np.int64)
    if imgs.shape[0] < need:
        raise SamplingError(f"only {imgs.shape[0]} distinct branch images")
    fit, hold = imgs[: need - check], imgs[need - check: need]
    ns3, _ = _interpolate_on(fit, 3, f)
    ns4, mons = _interpolate_on(fit, 4, f)
    if len(ns4) != 1:
        raise SamplingError(f"quartic nullspace has dimension {len(ns4)}, expected 1")
    K = MultiPoly(4, {e: c for e, c in zip(mons, ns4[0]) if not f.is_zero(c)}, f, _trusted=True).normalized()
    held = K.eval_many(hold)
    info = {
        "fit_images": int(fit.shape[0]),
        "held_out": int(hold.shape[0]),
        "held_out_ok": bool((held == 0).all()),
        "cubic_nullity": len(ns3),
        "quartic_nullity": len(ns4),
    }
    return K, info


def secant_contractions(web: QuadricWeb) -> list[tuple]:
    """Image of the line through each pair of base points (15 points)."""
    f = web.field
    P = web.source.pts
    out = []
    for i, j in itertools.combinations(range(6), 2):
        param = [[P[i][k], P[j][k]] for k in range(4)]  # P_i + t P_j
        img = []
        for Q in web.basis:
            c = Q.restrict_to_curve(param)
            c = c + [f.zero()] * (3 - len(c))
            if not (f.is_zero(c[0]) and f.is_zero(c[2])):
                raise GeneralPositionError(f"secant {i}{j} is not contracted", (i, j))
            img.append(c[1])
        lead = next((x for x in img if x), None)
        if lead is None:
            raise GeneralPositionError(f"secant {i}{j} lies in the base locus", (i, j))
        inv = f.inv(lead)
        out.append(tuple(f.mul(x, inv) for x in img))
    if len(set(out)) != 15:
        raise GeneralPositionError("two secant lines are contracted to the same point")
    return out


def sixteenth_node(web: QuadricWeb, K: MultiPoly, ext_degree: int = 2) -> dict:
    """Singular points of K over F_p and F_{p^ext}, compared with the secant images."""
    f = web.field
    sec = set(secant_contractions(web))
    base = singular_scan(K, f)
    report = {"over_p": len(base), "secant_nodes_found": len(sec & set(base))}
    try:
        ext = singular_scan(K, GF(f.p, ext_degree))
        report["over_ext"] = len(ext)
        report["extra"] = [list(map(int, p)) for p in ext if p not in sec]
        report["complete"] = True
    except BudgetError as exc:
        report["complete"] = False
        report["error"] = str(exc)
    return report


def twisted_cubic_contraction(ts: Sequence, field: FieldSpec) -> dict:
    """Restrict the web to (1:t:t^2:t^3); the four binary sextics must be proportional."""
    six = twisted_cubic_points(ts, field)
    web = quadrics_through(six)
    f = field
    param = [[1], [0, 1], [0, 0, 1], [0, 0, 0, 1]]
    sextics = []
    for Q in web.basis:
        c = Q.restrict_to_curve(param)
        sextics.append(c + [f.zero()] * (7 - len(c)))
    for c in sextics:
        for t in six.pts:
            if not f.is_zero(_ueval(c, t[1], f)):
                raise AssertionError("restricted quadric does not vanish at a base parameter")
    # ratio vector from the top coefficient of the common binary sextic
    ref = next(c for c in sextics if any(c))
    k = max(i for i, x in enumerate(ref) if x)
    lead = ref[k]
    ok = True
    for c in sextics:
        for i in range(7):
            if f.mul(c[i], lead) != f.mul(ref[i], c[k]):
                ok = False
    img = [c[k] for c in sextics]
    l0 = next(x for x in img if x)
    inv = f.inv(l0)
    return {
        "proportional": ok,
        "image": tuple(f.mul(x, inv) for x in img),
        "web": web,
        "sextic_degree": max(max((i for i, x in enumerate(c) if x), default=-1) for c in sextics),
    }


def _ueval(c, x, f):
    acc = f.zero()
    for a in reversed(c):
        acc = f.add(f.mul(acc, x), a)
    return acc


# -- (15_3) configurations ---------------------------------------------------

def _line_key(P: np.ndarray, Q: np.ndarray, f: FieldSpec) -> np.ndarray:
    """Reduced echelon form (flattened) of span(P, Q_r) for each row Q_r."""
    N, n = Q.shape
    A = np.broadcast_to(np.asarray(P, dtype=np.int64), Q.shape).copy()
    B = np.asarray(Q, dtype=np.int64).copy()
    swap = np.argmax(B != 0, axis=1) < np.argmax(A != 0, axis=1)
    A[swap], B[swap] = B[swap], A[swap].copy()
    A = normalize_rows(A, f)
    i0 = np.argmax(A != 0, axis=1)
    B = f.vsub(B, f.vmul(B[np.arange(N), i0][:, None].repeat(n, axis=1), A))
    B = normalize_rows(B, f)
    j0 = np.argmax(B != 0, axis=1)
    A = f.vsub(A, f.vmul(A[np.arange(N), j0][:, None].repeat(n, axis=1), B))
    return np.concatenate([A, B], axis=1)


def _line_in_locus(polys: Sequence[MultiPoly], A: Sequence, B: Sequence, f: FieldSpec) -> bool:
    param = [[A[k], B[k]] for k in range(len(A))]
    return all(not upoly_trim(P.restrict_to_curve(param, raw=True)) for P in polys)


def _line_meet(L1, L2, f: FieldSpec) -> tuple | None:
    """Intersection point of two distinct lines given by spanning pairs, or None if skew."""
    cols = [L1[0], L1[1], L2[0], L2[1]]
    M = [[int(c[i]) for c in cols] for i in range(len(L1[0]))]
    ns = MatrixF(M, f, raw=True).nullspace()
    if len(ns) != 1:
        return None
    x, y = int(ns[0][0]), int(ns[0][1])
    pt = f.vadd(f.vmul_scalar(np.asarray(L1[0], dtype=np.int64), x), f.vmul_scalar(np.asarray(L1[1], dtype=np.int64), y))
    return tuple(int(v) for v in normalize_rows(pt[None, :], f)[0])


def igusa_config_check(Q: MultiPoly, seed: int = 0, ext_degree: int = 2, slices: int = 3) -> dict:
    """Lines and nodes in the singular locus of a quartic in P^4.

    The singular locus is cut by ``slices`` random hyperplanes over F_p; each
    slice is a finite set, solved exactly over F_{p^ext_degree}.  A line is
    accepted when it joins points of two different slices and all partials
    vanish identically on it.  Three slices are used because a small-field
    hyperplane often passes through a node; a line is then still found unless
    it meets all three hyperplanes in the same point.  Nodes are the pairwise
    intersections of accepted lines.  Slice points left on no line signal
    further positive-dimensional components.  Rational singular points off
    the lines are found by an exhaustive scan over F_p.  ``line_spans`` holds
    two points (extension codes) on each accepted line.
    """
    if Q.field.kind != "prime":
        raise ValueError("expects a quartic over F_p")
    n = Q.nvars
    p = Q.field.p
    f = GF(p, ext_degree) if ext_degree > 1 else Q.field
    grads = [P for P in Q.gradient() if not P.is_zero()]
    polys = [P.change_field(f) for P in grads]
    rng = random.Random(seed)
    cuts = []
    redrawn = 0
    while len(cuts) < slices:
        h = MultiPoly(n, {tuple(int(i == j) for i in range(n)): Q.field.random(rng, nonzero=True) for j in range(n)}, Q.field)
        try:
            pts = _solve.elimination_zeros(polys + [h.change_field(f)], f, finite=True)
        except _solve.PositiveDimensionalError:
            # h contains a curve of the singular locus
            redrawn += 1
            if redrawn > 20:
                raise
            continue
        cuts.append([tuple(int(x) for x in pt) for pt in pts])
    lines: dict[tuple, tuple] = {}
    for c1, c2 in itertools.combinations(cuts, 2):
        for a in c1:
            for b in c2:
                if a == b or not _line_in_locus(polys, a, b, f):
                    continue
                key = tuple(int(x) for x in _line_key(np.asarray(a, dtype=np.int64), np.asarray([b], dtype=np.int64), f)[0])
                lines.setdefault(key, (a, b))
    spans = list(lines.values())
    keys = list(lines)
    stray = [pt for cut in cuts for pt in cut if not any(_line_in_locus(polys, pt, s[0], f) and _line_in_locus(polys, pt, s[1], f) for s in spans)]
    meets: dict[tuple, set] = {}
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            pt = _line_meet(spans[i], spans[j], f)
            if pt is not None:
                meets.setdefault(pt, set()).update((i, j))
    nodes_per_line = [sum(1 for s in meets.values() if i in s) for i in range(len(spans))]
    lines_per_node = [len(s) for s in meets.values()]
    rational = singular_scan(Q, Q.field)
    off = []
    for pt in rational:
        on = False
        for k in keys:
            A, B = np.asarray(k[:n], dtype=np.int64), np.asarray(k[n:], dtype=np.int64)
            M = [[int(A[i]), int(B[i]), int(pt[i])] for i in range(n)]
            if MatrixF(M, f, raw=True).rank() == 2:
                on = True
                break
        if not on:
            off.append(pt)
    ok = (
        len(spans) == 15
        and len(meets) == 15
        and all(c == 3 for c in nodes_per_line)
        and all(c == 3 for c in lines_per_node)
        and not stray
        and not off
    )
    return {
        "field": f.to_string(),
        "slice_points": [len(c) for c in cuts],
        "slices_redrawn": redrawn,
        "lines": len(spans),
        "nodes": len(meets),
        "nodes_per_line": sorted(nodes_per_line),
        "lines_per_node": sorted(lines_per_node),
        "stray_slice_points": len(stray),
        "singular_points_over_p": len(rational),
        "rational_points_off_lines": len(off),
        "pass": bool(ok),
        "line_spans": [[list(a), list(b)] for a, b in spans],
    }


def on_lines(points: np.ndarray, spans: Sequence, f: FieldSpec) -> np.ndarray:
    """Mask of the rows of ``points`` lying on one of the lines span(a, b)."""
    pts = np.asarray(points, dtype=np.int64)
    N, n = pts.shape
    mask = np.zeros(N, dtype=bool)
    for a, b in spans:
        a = normalize_rows(np.asarray([a], dtype=np.int64), f)[0]
        key = _line_key(a, np.asarray([b], dtype=np.int64), f)[0]
        r1, r2 = key[:n], key[n:]
        i, j = int(np.flatnonzero(r1)[0]), int(np.flatnonzero(r2)[0])
        res = f.vsub(pts, f.vmul(pts[:, i:i + 1].repeat(n, axis=1), np.broadcast_to(r1, pts.shape).copy()))
        res = f.vsub(res, f.vmul(pts[:, j:j + 1].repeat(n, axis=1), np.broadcast_to(r2, pts.shape).copy()))
        mask |= ~res.any(axis=1)
    return mask
