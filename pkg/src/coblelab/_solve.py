"""Projective point enumeration and common-zero finding over finite fields.

Two engines:

* brute force: every point of P^n(F_q), vectorised in chunks;
* elimination: per affine chart a lex Groebner basis over the prime field
  (sympy), then back substitution with root finding over F_q.  Components of
  positive dimension are enumerated by branching over all values of a free
  variable, under a budget.

Both return normalised points (first nonzero coordinate 1) as tuples of raw
codes, sorted.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from coblelab.fields import FieldSpec, roots_raw, upoly_gcd, upoly_trim
from coblelab.multipoly import MultiPoly

BRUTE_LIMIT = 1 << 22  # ambient points for the vectorised scan
BRANCH_LIMIT = 1 << 21  # partial assignments explored by the elimination engine
_CHUNK = 1 << 17


class PositiveDimensionalError(ValueError):
    """The system has infinitely many solutions in some affine chart."""


class BudgetError(RuntimeError):
    def __init__(self, msg: str, required: int):
        super().__init__(msg)
        self.required = required


def projective_count(n: int, q: int) -> int:
    """|P^n(F_q)|."""
    return (q ** (n + 1) - 1) // (q - 1)


def iter_projective_chunks(nvars: int, q: int, chunk: int = _CHUNK) -> Iterable[np.ndarray]:
    """All normalised points of P^(nvars-1)(F_q) as int64 arrays of raw codes."""
    for lead in range(nvars):
        free = nvars - lead - 1
        total = q**free
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
            pts = np.zeros((idx.size, nvars), dtype=np.int64)
            pts[:, lead] = 1
            rest = idx
            for col in range(nvars - 1, lead, -1):
                pts[:, col] = rest % q
                rest = rest // q
            yield pts


def normalize_rows(pts: np.ndarray, f: FieldSpec) -> np.ndarray:
    """Scale each row so its first nonzero entry is 1 (zero rows stay zero)."""
    pts = np.asarray(pts, dtype=np.int64)
    if pts.size == 0:
        return pts.copy()
    nz = pts != 0
    first = np.argmax(nz, axis=1)
    lead = pts[np.arange(pts.shape[0]), first]
    inv = f.vinv(lead)
    out = np.empty_like(pts)
    for j in range(pts.shape[1]):
        out[:, j] = f.vmul(pts[:, j], inv)
    return out


def brute_zeros(polys: Sequence[MultiPoly], f: FieldSpec) -> list[tuple]:
    n = polys[0].nvars
    found = []
    for pts in iter_projective_chunks(n, f.q):
        mask = np.ones(pts.shape[0], dtype=bool)
        for P in polys:
            if not mask.any():
                break
            sub = pts[mask]
            vals = P.eval_many(sub)
            idx = np.flatnonzero(mask)
            mask[idx[vals != 0]] = False
        found.extend(tuple(int(x) for x in row) for row in pts[mask])
    return sorted(found)


def reference_zeros(polys: Sequence[MultiPoly], f: FieldSpec) -> list[tuple]:
    """Plain-Python scan in a different order: all vectors, descending, keep normalised ones."""
    n = polys[0].nvars
    out = set()
    for v in itertools.product(range(f.q - 1, -1, -1), repeat=n):
        lead = next((x for x in v if x), None)
        if lead != 1:
            continue
        if all(f.is_zero(P.eval_raw(list(v))) for P in polys):
            out.add(v)
    return sorted(out)


# -- elimination engine -----------------------------------------------------

def _to_sympy(P: MultiPoly, syms, keep: Sequence[int], fixed: dict):
    """Expression in the variables ``keep`` after fixing the others to integer values."""
    import sympy

    expr = 0
    for e, c in P.terms.items():
        v = int(c)
        ok = True
        for i, k in enumerate(e):
            if i in fixed and k:
                if fixed[i] == 0:
                    ok = False
                    break
                v *= fixed[i] ** k
        if not ok:
            continue
        mono = sympy.Integer(v)
        for pos, i in enumerate(keep):
            if e[i]:
                mono *= syms[pos] ** e[i]
        expr += mono
    return expr


def _groebner_terms(polys: Sequence[MultiPoly], keep: Sequence[int], fixed: dict, p: int, finite: bool = False):
    """Lex Groebner basis over F_p; each element as a list of (exps, coeff mod p)."""
    import sympy

    syms = sympy.symbols(f"v0:{len(keep)}")
    exprs = [_to_sympy(P, syms, keep, fixed) for P in polys]
    exprs = [x for x in exprs if x != 0]
    if not exprs:
        return []
    if not syms:
        return [[((), 1)]] if any(int(x) % p for x in exprs) else []
    # grevlex then FGLM is much faster than a direct lex basis on finite systems
    G = sympy.groebner(exprs, *syms, modulus=p, order="grevlex")
    if G.exprs == [1]:
        return [[(tuple([0] * len(syms)), 1)]]
    if G.is_zero_dimensional:
        G = G.fglm("lex")
    elif finite:
        raise PositiveDimensionalError("the system is not zero-dimensional")
    else:
        G = sympy.groebner(exprs, *syms, modulus=p, order="lex")
    out = []
    for g in G.exprs:
        poly = sympy.Poly(g, *syms, modulus=p)
        terms = [(tuple(m), int(c) % p) for m, c in poly.terms() if int(c) % p]
        if terms:
            out.append(terms)
    return out


class _Solver:
    def __init__(self, basis, nv: int, f: FieldSpec, budget: int):
        self.f = f
        self.nv = nv
        self.budget = budget
        self.spent = 0
        # each basis element, tagged with its highest-priority (smallest index) variable
        self.by_level: list[list] = [[] for _ in range(nv + 1)]
        for terms in basis:
            used = [i for i in range(nv) if any(e[i] for e, _ in terms)]
            level = min(used) if used else nv
            self.by_level[level].append(terms)

    def _univariate(self, terms, k: int, vals: dict) -> list:
        f = self.f
        coeffs: dict = {}
        for e, c in terms:
            v = c
            for j in range(k + 1, self.nv):
                if e[j]:
                    v = f.mul(v, f.pow(vals[j], e[j]))
            coeffs[e[k]] = f.add(coeffs.get(e[k], f.zero()), v)
        deg = max(coeffs)
        return upoly_trim([coeffs.get(i, f.zero()) for i in range(deg + 1)])

    def solve(self) -> list[dict]:
        if any(not any(any(e) for e, _ in t) for t in self.by_level[self.nv]):
            return []  # the basis contains a nonzero constant
        out: list[dict] = []
        self._rec(self.nv - 1, {}, out)
        return out

    def _rec(self, k: int, vals: dict, out: list):
        if k < 0:
            out.append(dict(vals))
            return
        self.spent += 1
        if self.spent > self.budget:
            raise BudgetError("elimination branching budget exceeded", self.spent)
        f = self.f
        g: list = []
        for terms in self.by_level[k]:
            u = self._univariate(terms, k, vals)
            if not u:
                continue
            g = u if not g else upoly_gcd(f, g, u)
            if len(g) == 1:
                return
        if g:
            cands = roots_raw(g, f)
        else:
            cands = range(f.q)
        for r in cands:
            vals[k] = r
            self._rec(k - 1, vals, out)
        vals.pop(k, None)


def elimination_zeros(polys: Sequence[MultiPoly], f: FieldSpec, budget: int = BRANCH_LIMIT,
                      finite: bool = False) -> list[tuple]:
    """Common projective zeros over ``f`` of forms with coefficients in the prime field.

    ``finite=True`` raises PositiveDimensionalError instead of enumerating a
    positive-dimensional solution set.
    """
    polys = [P.change_field(f) if P.field != f else P for P in polys]
    n = polys[0].nvars
    p = f.p
    for P in polys:
        if any(int(c) >= p for c in P.terms.values()):
            raise BudgetError("elimination needs coefficients in the prime field", 0)
    found = []
    spent = 0
    for lead in range(n):
        keep = list(range(lead + 1, n))
        fixed = {i: 0 for i in range(lead)}
        fixed[lead] = 1
        basis = _groebner_terms(polys, keep, fixed, p, finite)
        solver = _Solver(basis, len(keep), f, budget - spent)
        for sol in solver.solve():
            pt = [0] * n
            pt[lead] = 1
            for pos, i in enumerate(keep):
                pt[i] = sol[pos]
            found.append(tuple(pt))
        spent += solver.spent
    # every candidate is re-checked against the original forms
    good = [pt for pt in found if all(f.is_zero(P.eval_raw(list(pt))) for P in polys)]
    return sorted(set(good))


def common_zeros(polys: Sequence[MultiPoly], f: FieldSpec, method: str = "auto") -> tuple[list[tuple], str]:
    """Common zeros in P^(n-1)(f); the forms may live over the prime subfield of f."""
    polys = [P.change_field(f) if P.field != f else P for P in polys]
    polys = [P for P in polys if not P.is_zero()]
    n = polys[0].nvars if polys else 0
    if not polys:
        raise ValueError("need at least one nonzero form")
    total = projective_count(n - 1, f.q)
    if method == "auto":
        method = "brute" if total <= BRUTE_LIMIT else "elimination"
    if method == "brute":
        if total > BRUTE_LIMIT:
            raise BudgetError(f"{total} points exceed the scan budget {BRUTE_LIMIT}", total)
        return brute_zeros(polys, f), method
    if method == "reference":
        return reference_zeros(polys, f), method
    if method == "elimination":
        return elimination_zeros(polys, f), method
    raise ValueError(f"unknown method {method!r}")
