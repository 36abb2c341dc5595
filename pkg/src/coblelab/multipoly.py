"""Sparse multivariate polynomials over a :class:`~coblelab.fields.FieldSpec`.

A :class:`MultiPoly` maps exponent tuples to nonzero raw coefficients.  Terms
are kept in a plain dict; every method that exposes an ordering uses graded
lex (highest total degree first, then lexicographically largest exponent).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

import numpy as np

from coblelab.fields import FieldElem, FieldError, FieldSpec

__all__ = [
    "MultiPoly",
    "LinearChange",
    "DivisibilityError",
    "monomial_basis",
    "evaluate",
    "gradient",
    "substitute_linear",
    "extract_coordinate_power",
    "eval_monomials",
]

MAX_DEGREE = 8
MAX_VARS = 10


class DivisibilityError(ValueError):
    """The requested power of a linear form does not divide the polynomial."""

    def __init__(self, valuation: int, wanted: int):
        super().__init__(f"linear form divides only to power {valuation}, {wanted} requested")
        self.valuation = valuation
        self.wanted = wanted


def _glex_key(e):
    return (-sum(e), tuple(-x for x in e))


def monomial_basis(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponent vectors of length n and total degree d, in graded-lex order."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    rec((), d, n)
    assert len(out) == comb(n + d - 1, d)
    return out


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "field", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, object], field: FieldSpec, *, _trusted=False):
        if not 1 <= nvars <= MAX_VARS:
            raise ValueError(f"number of variables must be in 1..{MAX_VARS}")
        if _trusted:
            clean = dict(terms)
        else:
            clean = {}
            for e, c in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != nvars or min(e, default=0) < 0:
                    raise ValueError(f"bad exponent vector {e} for {nvars} variables")
                c = field.coerce(c)
                if not field.is_zero(c):
                    clean[e] = field.add(clean[e], c) if e in clean else c
                    if field.is_zero(clean[e]):
                        del clean[e]
        if clean and max(sum(e) for e in clean) > MAX_DEGREE:
            raise ValueError(f"degree exceeds the cap of {MAX_DEGREE}")
        self.nvars = nvars
        self.terms = clean
        self.field = field
        self._hash = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, field: FieldSpec) -> "MultiPoly":
        return cls(nvars, {}, field, _trusted=True)

    @classmethod
    def constant(cls, c, nvars: int, field: FieldSpec) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c}, field)

    @classmethod
    def variable(cls, i: int, nvars: int, field: FieldSpec) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): field.one()}, field, _trusted=True)

    @classmethod
    def variables(cls, nvars: int, field: FieldSpec) -> list["MultiPoly"]:
        return [cls.variable(i, nvars, field) for i in range(nvars)]

    @classmethod
    def linear_form(cls, coeffs: Sequence, field: FieldSpec, raw: bool = False) -> "MultiPoly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            c = int(c) if raw else field.coerce(c)
            if not field.is_zero(c):
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        return cls(n, terms, field, _trusted=True)

    # -- basic structure ---------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if not degs:
            return True
        return len(degs) == 1 and (d is None or d in degs)

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        return sorted(self.terms.items(), key=lambda t: _glex_key(t[0]))

    def coeff(self, e: Sequence[int]) -> FieldElem:
        return FieldElem(self.field, self.terms.get(tuple(e), self.field.zero()))

    def leading(self) -> tuple[tuple, object]:
        return min(self.terms.items(), key=lambda t: _glex_key(t[0]))

    def variables_used(self) -> set[int]:
        return {i for e in self.terms for i, x in enumerate(e) if x}

    def __repr__(self):
        return f"MultiPoly({self.nvars} vars over {self.field.to_string()}: {self.pretty()})"

    def pretty(self, names: Sequence[str] | None = None, limit: int = 12) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i}" for i in range(self.nvars)]
        parts = []
        for e, c in self.sorted_terms()[:limit]:
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        tail = " + ..." if len(self.terms) > limit else ""
        return " + ".join(parts) + tail

    # -- equality ----------------------------------------------------------
    def _check(self, other: "MultiPoly"):
        if not isinstance(other, MultiPoly):
            raise TypeError("MultiPoly expected")
        if other.field != self.field:
            raise FieldError("polynomials over different fields")
        if other.nvars != self.nvars:
            raise ValueError("polynomials in different numbers of variables")

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.field == other.field and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, self.field, frozenset(self.terms.items())))
        return self._hash

    def proportional(self, other: "MultiPoly") -> bool:
        """True iff ``self = c * other`` for a nonzero scalar c (cross-multiplication test)."""
        self._check(other)
        if not self.terms or not other.terms:
            return not self.terms and not other.terms
        if self.terms.keys() != other.terms.keys():
            return False
        f = self.field
        r = next(iter(self.terms))
        a, b = self.terms[r], other.terms[r]
        return all(f.mul(c, b) == f.mul(other.terms[e], a) for e, c in self.terms.items())

    def normalized(self) -> "MultiPoly":
        """Scaled so that the graded-lex leading coefficient is 1."""
        if not self.terms:
            return self
        return self.scale_raw(self.field.inv(self.leading()[1]))

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.nvars, self.field)
        self._check(other)
        f = self.field
        t = dict(self.terms)
        for e, c in other.terms.items():
            if e in t:
                s = f.add(t[e], c)
                if f.is_zero(s):
                    del t[e]
                else:
                    t[e] = s
            else:
                t[e] = c
        return MultiPoly(self.nvars, t, f, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        return MultiPoly(self.nvars, {e: f.neg(c) for e, c in self.terms.items()}, f, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.nvars, self.field)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "MultiPoly":
        return self.scale_raw(self.field.coerce(c))

    def scale_raw(self, c) -> "MultiPoly":
        """Scale by an already-canonical raw field value (extension codes included)."""
        f = self.field
        if f.is_zero(c):
            return MultiPoly.zero(self.nvars, f)
        return MultiPoly(self.nvars, {e: f.mul(v, c) for e, v in self.terms.items()}, f, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        f = self.field
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = f.mul(c1, c2)
                t[e] = f.add(t[e], v) if e in t else v
        return MultiPoly(self.nvars, {e: c for e, c in t.items() if not f.is_zero(c)}, f, _trusted=True)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = MultiPoly.constant(1, self.nvars, self.field)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- calculus and evaluation -------------------------------------------
    def diff(self, i: int) -> "MultiPoly":
        f = self.field
        t = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                v = f.mul(c, f.coerce(k))
                if not f.is_zero(v):
                    e2 = list(e)
                    e2[i] = k - 1
                    t[tuple(e2)] = v
        return MultiPoly(self.nvars, t, f, _trusted=True)

    def gradient(self) -> list["MultiPoly"]:
        return [self.diff(i) for i in range(self.nvars)]

    def eval_raw(self, pt: Sequence):
        f = self.field
        if len(pt) != self.nvars:
            raise ValueError(f"point has {len(pt)} coordinates, polynomial has {self.nvars} variables")
        pows: dict = {}
        acc = f.zero()
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    pw = pows.get(key)
                    if pw is None:
                        pw = pows[key] = f.pow(pt[i], k)
                    v = f.mul(v, pw)
            acc = f.add(acc, v)
        return acc

    def __call__(self, *pt) -> FieldElem:
        if len(pt) == 1 and isinstance(pt[0], (list, tuple, np.ndarray)):
            pt = pt[0]
        return FieldElem(self.field, self.eval_raw([self.field.coerce(x) for x in pt]))

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorised evaluation at the rows of an int64 array of raw codes."""
        f = self.field
        if not f.is_finite:
            raise FieldError("vectorised evaluation needs a finite field")
        points = np.asarray(points, dtype=np.int64)
        if points.ndim != 2 or points.shape[1] != self.nvars:
            raise ValueError("points must be an (N, nvars) array")
        N = points.shape[0]
        pows = _power_table(points, max(self.degree, 0), f)
        acc = np.zeros(N, dtype=np.int64)
        for e, c in self.terms.items():
            v = np.full(N, c, dtype=np.int64)
            for i, k in enumerate(e):
                if k:
                    v = f.vmul(v, pows[i][k])
            acc = f.vadd(acc, v)
        return acc

    # -- substitution ------------------------------------------------------
    def substitute_linear(self, A: "LinearChange") -> "MultiPoly":
        if A.field != self.field:
            raise FieldError("substitution matrix over a different field")
        if A.n_out != self.nvars:
            raise ValueError(f"substitution produces {A.n_out} coordinates, polynomial needs {self.nvars}")
        f = self.field
        forms = A.forms()
        cache: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                cache[key] = forms[i] if k == 1 else power(i, k - 1) * forms[i]
            return cache[key]

        acc: dict = {}
        for e, c in self.terms.items():
            term = MultiPoly(A.n_in, {(0,) * A.n_in: c}, f, _trusted=True)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            for e2, c2 in term.terms.items():
                acc[e2] = f.add(acc[e2], c2) if e2 in acc else c2
        return MultiPoly(A.n_in, {e: c for e, c in acc.items() if not f.is_zero(c)}, f, _trusted=True)

    def substitute(self, polys: Sequence["MultiPoly"]) -> "MultiPoly":
        """Compose with arbitrary polynomials (one per variable)."""
        if len(polys) != self.nvars:
            raise ValueError("need one polynomial per variable")
        n = polys[0].nvars
        f = self.field
        acc = MultiPoly.zero(n, f)
        for e, c in self.terms.items():
            term = MultiPoly(n, {(0,) * n: c}, f, _trusted=True)
            for i, k in enumerate(e):
                if k:
                    term = term * polys[i] ** k
            acc = acc + term
        return acc

    def restrict_to_curve(self, param: Sequence[Sequence], raw: bool = False) -> list:
        """Compose with a curve t -> (param[0](t), ...), each a low-to-high coefficient list.

        Returns the univariate coefficient list (raw, low-to-high, untrimmed
        trailing zeros removed).  Used for curves of degree > 1, where the
        result may exceed the multivariate degree cap.
        """
        from coblelab.fields import upoly_mul, upoly_trim

        f = self.field
        if len(param) != self.nvars:
            raise ValueError("need one coordinate function per variable")
        if not raw:
            param = [[f.coerce(c) for c in comp] for comp in param]
        cache: dict = {}
        out: list = []
        for e, c in self.terms.items():
            v = [c]
            for i, k in enumerate(e):
                for j in range(1, k + 1):
                    key = (i, j)
                    if key not in cache:
                        cache[key] = param[i] if j == 1 else upoly_mul(f, cache[(i, j - 1)], param[i])
                if k:
                    v = upoly_mul(f, v, cache[(i, k)])
            for j, x in enumerate(v):
                if j >= len(out):
                    out.extend([f.zero()] * (j + 1 - len(out)))
                out[j] = f.add(out[j], x)
        return upoly_trim(out)

    # -- field changes -----------------------------------------------------
    def change_field(self, target: FieldSpec) -> "MultiPoly":
        """Reduce QQ -> F_p, or embed F_p into an extension of the same characteristic."""
        src = self.field
        if src == target:
            return self
        if src.kind == "rational":
            terms = {e: target.coerce(c) for e, c in self.terms.items()}
        elif src.k == 1 and target.is_finite and target.p == src.p:
            terms = {e: int(c) for e, c in self.terms.items()}
        else:
            raise FieldError(f"no coefficient map {src.to_string()} -> {target.to_string()}")
        return MultiPoly(self.nvars, terms, target)

    # -- text format -------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"vars={self.nvars} degree={self.degree} field={self.field.to_string()}"]
        for e, c in self.sorted_terms():
            if isinstance(c, Fraction):
                cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            else:
                cs = str(int(c))
            lines.append(" ".join(map(str, e)) + " : " + cs)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MultiPoly":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty polynomial text")
        header = dict(tok.split("=", 1) for tok in lines[0].split())
        n = int(header["vars"])
        field = FieldSpec.from_string(header["field"])
        terms = {}
        for ln in lines[1:]:
            lhs, _, rhs = ln.partition(":")
            e = tuple(int(x) for x in lhs.split())
            rhs = rhs.strip()
            c = Fraction(rhs) if field.kind == "rational" else int(rhs)
            if field.kind != "rational" and not 0 <= c < field.q:
                raise ValueError(f"coefficient {c} out of canonical range")
            if e in terms:
                raise ValueError(f"duplicate exponent {e}")
            terms[e] = c
        poly = cls(n, terms, field)
        if poly.degree != int(header["degree"]):
            raise ValueError("degree in header does not match the terms")
        return poly


def _power_table(points: np.ndarray, dmax: int, f: FieldSpec) -> list[list[np.ndarray]]:
    N, n = points.shape
    table = []
    for i in range(n):
        col = points[:, i]
        row = [np.ones(N, dtype=np.int64)]
        for _ in range(dmax):
            row.append(f.vmul(row[-1], col))
        table.append(row)
    return table


def eval_monomials(points: np.ndarray, exps: Sequence[Sequence[int]], f: FieldSpec) -> np.ndarray:
    """Matrix whose (r, j) entry is the j-th monomial evaluated at the r-th point."""
    points = np.asarray(points, dtype=np.int64)
    dmax = max((sum(e) for e in exps), default=0)
    pows = _power_table(points, dmax, f)
    out = np.empty((points.shape[0], len(exps)), dtype=np.int64)
    for j, e in enumerate(exps):
        v = None
        for i, k in enumerate(e):
            if k:
                v = pows[i][k] if v is None else f.vmul(v, pows[i][k])
        out[:, j] = 1 if v is None else v
    return out


class LinearChange:
    """Substitution ``X = A Z``: an ``n_out x n_in`` matrix whose columns are images of basis vectors."""

    __slots__ = ("matrix", "field", "n_out", "n_in")

    def __init__(self, matrix: Sequence[Sequence], field: FieldSpec, *, embedding: bool = False, raw: bool = False):
        if raw:
            rows = [list(row) for row in matrix]
        else:
            rows = [[field.coerce(x) for x in row] for row in matrix]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("matrix must be rectangular and nonempty")
        self.matrix = rows
        self.field = field
        self.n_out = len(rows)
        self.n_in = len(rows[0])
        if embedding:
            from coblelab.linalg import MatrixF

            if MatrixF(rows, field, raw=True).rank() != self.n_in:
                raise ValueError("embedding matrix must have full column rank")

    def forms(self) -> list[MultiPoly]:
        f = self.field
        out = []
        for row in self.matrix:
            terms = {}
            for j, c in enumerate(row):
                if not f.is_zero(c):
                    e = [0] * self.n_in
                    e[j] = 1
                    terms[tuple(e)] = c
            out.append(MultiPoly(self.n_in, terms, f, _trusted=True))
        return out

    def apply(self, z: Sequence) -> list:
        f = self.field
        z = [f.coerce(x) for x in z]
        return [f.sum(f.mul(a, b) for a, b in zip(row, z)) for row in self.matrix]

    def transpose_apply(self, w: Sequence) -> list:
        f = self.field
        w = [f.coerce(x) for x in w]
        return [f.sum(f.mul(self.matrix[i][j], w[i]) for i in range(self.n_out)) for j in range(self.n_in)]

    def __matmul__(self, other: "LinearChange") -> "LinearChange":
        if other.n_out != self.n_in:
            raise ValueError("dimension mismatch in composition")
        f = self.field
        m = [
            [f.sum(f.mul(self.matrix[i][k], other.matrix[k][j]) for k in range(self.n_in)) for j in range(other.n_in)]
            for i in range(self.n_out)
        ]
        return LinearChange(m, f, raw=True)

    def __eq__(self, other):
        return isinstance(other, LinearChange) and self.field == other.field and self.matrix == other.matrix

    def __repr__(self):
        return f"LinearChange({self.n_out}x{self.n_in} over {self.field.to_string()})"


# module-level operation names
def evaluate(F: MultiPoly, pt: Sequence) -> FieldElem:
    return F(list(pt))


def gradient(F: MultiPoly) -> list[MultiPoly]:
    return F.gradient()


def substitute_linear(F: MultiPoly, A: LinearChange) -> MultiPoly:
    return F.substitute_linear(A)


def extract_coordinate_power(F: MultiPoly, L: MultiPoly | Sequence, m: int) -> MultiPoly:
    """Return F / L^m for a linear form L, or raise :class:`DivisibilityError`.

    L is moved to a coordinate by an invertible change of variables; the
    valuation is read off the exponents of that coordinate.
    """
    f = F.field
    n = F.nvars
    if isinstance(L, MultiPoly):
        if not L.is_homogeneous(1):
            raise ValueError("L must be a linear form")
        coeffs = [L.terms.get(tuple(int(i == j) for i in range(n)), f.zero()) for j in range(n)]
    else:
        coeffs = [f.coerce(c) for c in L]
    if len(coeffs) != n:
        raise ValueError("linear form has the wrong number of variables")
    piv = next((j for j, c in enumerate(coeffs) if not f.is_zero(c)), None)
    if piv is None:
        raise ValueError("L is the zero form")
    inv = f.inv(coeffs[piv])
    # X = A W with W_piv = L(X) and W_i = X_i otherwise
    A = [[f.one() if i == j else f.zero() for j in range(n)] for i in range(n)]
    A[piv] = [f.mul(f.neg(c), inv) if j != piv else inv for j, c in enumerate(coeffs)]
    G = F.substitute_linear(LinearChange(A, f, raw=True))
    val = min((e[piv] for e in G.terms), default=m)
    if not G.terms:
        return G
    if val < m:
        raise DivisibilityError(val, m)
    shifted = {e[:piv] + (e[piv] - m,) + e[piv + 1:]: c for e, c in G.terms.items()}
    Q = MultiPoly(n, shifted, f, _trusted=True)
    B = [[f.one() if i == j else f.zero() for j in range(n)] for i in range(n)]
    B[piv] = list(coeffs)
    return Q.substitute_linear(LinearChange(B, f, raw=True))


def valuation(F: MultiPoly, L: MultiPoly | Sequence) -> int:
    """Largest m such that L^m divides F (F nonzero)."""
    m = 0
    while True:
        try:
            extract_coordinate_power(F, L, m + 1)
        except DivisibilityError as exc:
            return exc.valuation
        m += 1
        if m > F.degree:
            return m


