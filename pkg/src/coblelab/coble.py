"""The invariant cubic family, its polar map, the tau-fixed embeddings and the
polynomial identities relating them.

Coordinate order is (X00, X01, X02, X10, X11, X12, X20, X21, X22) throughout.
P^3_- and P^4_+ are the two fixed loci of tau: X_b -> X_{-b}; the same
embeddings serve for the dual spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb
from typing import Sequence

from coblelab.fields import FieldError, FieldSpec
from coblelab.heis import INDEX, c3_groups, index_of, tau_act
from coblelab.linalg import MatrixF
from coblelab.multipoly import LinearChange, MultiPoly, monomial_basis

__all__ = [
    "CobleParams",
    "FixedLoci",
    "Verdict",
    "build_cubic",
    "polar_map",
    "fixed_loci",
    "check_tau_equivariance",
    "check_fixed_locus_mapping",
    "check_minus_relation",
    "check_restricted_dual_commutes",
    "segre_restriction",
    "segre_display",
    "segre_groups",
    "segre_groups_rank",
    "pairing_scale",
    "sigma_degree",
    "secant_threefold_degree",
]


@dataclass
class Verdict:
    ok: bool
    detail: dict = dc_field(default_factory=dict)

    def __bool__(self):
        return self.ok


class CobleParams:
    """alpha = (a0, ..., a4) over a field where 3 is invertible."""

    def __init__(self, alpha: Sequence, field: FieldSpec):
        if len(alpha) != 5:
            raise ValueError("alpha has five entries")
        if field.is_finite and field.p == 3:
            raise FieldError("3 must be invertible")
        self.field = field
        self.alpha = tuple(field.coerce(a) for a in alpha)
        if all(field.is_zero(a) for a in self.alpha):
            raise ValueError("alpha must not be the zero vector")

    def __repr__(self):
        return f"CobleParams({[str(a) for a in self.alpha]} over {self.field.to_string()})"

    def __eq__(self, other):
        return isinstance(other, CobleParams) and self.field == other.field and self.alpha == other.alpha

    def reduce(self, target: FieldSpec) -> "CobleParams":
        """Reduce rational (or integer) parameters into a finite field."""
        if self.field.kind != "rational":
            raise FieldError("only rational parameters can be reduced")
        return CobleParams([target.coerce(a) for a in self.alpha], target)


def build_cubic(params: CobleParams) -> MultiPoly:
    """a0/3 * sum X_b^3 + 2 a1 rows + 2 a2 columns + 2 a3 diagonals + 2 a4 antidiagonals."""
    f = params.field
    groups = c3_groups(f)
    a = params.alpha
    coeffs = [f.div(a[0], f.coerce(3))] + [f.mul(f.coerce(2), x) for x in a[1:]]
    G = MultiPoly.zero(9, f)
    for c, g in zip(coeffs, groups):
        G = G + g.scale_raw(c)
    return G


def polar_map(G: MultiPoly) -> list[MultiPoly]:
    if G.nvars != 9 or not G.is_homogeneous(3) or G.is_zero():
        raise ValueError("polar_map expects a nonzero cubic form in 9 variables")
    return G.gradient()


# -- fixed loci of tau ------------------------------------------------------

_MINUS = ("01", "10", "11", "12")  # P^3_- coordinates Z0..Z3 sit at these X_b


@dataclass
class FixedLoci:
    gamma_minus: LinearChange
    gamma_plus: LinearChange
    minus_forms: list  # five forms cutting out P^3_-
    plus_forms: list  # four forms cutting out P^4_+


def fixed_loci(f: FieldSpec) -> FixedLoci:
    """gamma_-(Z) = (0, Z0, -Z0, Z1, Z2, Z3, -Z1, -Z3, -Z2);
    gamma_+(Y) = (Y0, Y1, Y1, Y2, Y3, Y4, Y2, Y4, Y3)."""
    gm = [[0] * 4 for _ in range(9)]
    gp = [[0] * 5 for _ in range(9)]
    gp[0][0] = 1
    for j, s in enumerate(_MINUS):
        b = (int(s[0]), int(s[1]))
        i, i2 = index_of(b), index_of((-b[0], -b[1]))
        gm[i][j] = 1
        gm[i2][j] = -1
        gp[i][j + 1] = 1
        gp[i2][j + 1] = 1
    minus_forms = [MultiPoly.variable(0, 9, f)]
    plus_forms = []
    X = MultiPoly.variables(9, f)
    for s in _MINUS:
        b = (int(s[0]), int(s[1]))
        i, i2 = index_of(b), index_of((-b[0], -b[1]))
        minus_forms.append(X[i] + X[i2])
        plus_forms.append(X[i] - X[i2])
    return FixedLoci(
        LinearChange(gm, f, embedding=True), LinearChange(gp, f, embedding=True), minus_forms, plus_forms
    )


def _pretty_b(i: int) -> str:
    return "%d%d" % INDEX[i]


def check_tau_equivariance(G: MultiPoly) -> Verdict:
    """(dG/dX_b) o tau == dG/dX_{-b} for all nine b."""
    grad = G.gradient()
    perm = [index_of((-b[0], -b[1])) for b in INDEX]
    for i in range(9):
        if tau_act(grad[i]) != grad[perm[i]]:
            return Verdict(False, {"failing_index": _pretty_b(i)})
    return Verdict(True, {"identities": 9})


def _restricted_gradient(F: MultiPoly, gamma: LinearChange) -> list[MultiPoly]:
    return [g.substitute_linear(gamma) for g in F.gradient()]


def check_fixed_locus_mapping(F: MultiPoly, sign: str) -> Verdict:
    """Where the gradient map sends a tau-fixed locus.

    From F o tau = F: dF_b(tau x) = dF_{-b}(x).  On P^4_+ (tau x = x) the image
    is symmetric, so it lies in P^4_+.  On P^3_- (tau x = -x) the partials pick
    up (-1)^(deg F - 1): odd degree sends P^3_- into P^4_+ (cubic case), even
    degree into P^3_- (sextic case).
    """
    if sign not in ("+", "-"):
        raise ValueError("sign is '+' or '-'")
    if F.nvars != 9 or not F.is_homogeneous() or F.is_zero():
        raise ValueError("expects a nonzero form in 9 variables")
    if tau_act(F) != F:
        raise ValueError("input is not tau-invariant")
    f = F.field
    loci = fixed_loci(f)
    gamma = loci.gamma_plus if sign == "+" else loci.gamma_minus
    d = F.degree
    target = "+" if (sign == "+" or d % 2 == 1) else "-"
    forms = loci.plus_forms if target == "+" else loci.minus_forms
    image = _restricted_gradient(F, gamma)
    failures = []
    for k, L in enumerate(forms):
        val = MultiPoly.zero(gamma.n_in, f)
        for e, c in L.terms.items():
            val = val + image[e.index(1)].scale_raw(c)
        if not val.is_zero():
            failures.append(k)
    return Verdict(
        not failures,
        {"source": sign, "target": target, "degree": d, "equations": len(forms), "failing_equations": failures},
    )


def check_minus_relation(params: CobleParams) -> dict:
    """The extra linear relation satisfied by the polar image of P^3_-.

    Two relations are tested on grad G o gamma_-:
      literal:   a0 X00 + a1 X01 + a2 X10 + a3 X12 + a4 X11
      corrected: (a0/2) X00 + a1 X01 + a2 X10 + a3 X11 + a4 X12
    Only the corrected one holds identically for the cubic built here.
    """
    f = params.field
    G = build_cubic(params)
    img = _restricted_gradient(G, fixed_loci(f).gamma_minus)
    a = params.alpha
    at = {s: img[index_of((int(s[0]), int(s[1])))] for s in ("00", "01", "10", "11", "12")}
    literal = at["00"].scale_raw(a[0]) + at["01"].scale_raw(a[1]) + at["10"].scale_raw(a[2])
    literal = literal + at["12"].scale_raw(a[3]) + at["11"].scale_raw(a[4])
    half = f.div(a[0], f.coerce(2))
    corrected = at["00"].scale_raw(half) + at["01"].scale_raw(a[1]) + at["10"].scale_raw(a[2])
    corrected = corrected + at["11"].scale_raw(a[3]) + at["12"].scale_raw(a[4])
    return {
        "literal": Verdict(literal.is_zero(), {"residual_terms": len(literal.terms)}),
        "corrected": Verdict(corrected.is_zero(), {"residual_terms": len(corrected.terms)}),
    }


def check_restricted_dual_commutes(F: MultiPoly, sign: str) -> Verdict:
    """Partials of F o gamma against the restricted partials of F.

    gamma_-:  d(F o gamma_-)/dZ_i = 2 F'_{b_i} o gamma_-  (b_i = 01, 10, 11, 12)
    gamma_+:  d(F o gamma_+)/dY_0 = F'_00 o gamma_+ and
              d(F o gamma_+)/dY_j = 2 F'_{b_j} o gamma_+  (j = 1..4)
    so the gradient of the restriction is the restricted gradient read in the
    coordinates of the fixed locus, scaled by diag(2,2,2,2) resp. diag(1,2,2,2,2).
    """
    f = F.field
    loci = fixed_loci(f)
    gamma = loci.gamma_plus if sign == "+" else loci.gamma_minus
    H = F.substitute_linear(gamma)
    dH = H.gradient()
    img = _restricted_gradient(F, gamma)
    targets = ([("00", 1)] if sign == "+" else []) + [(s, 2) for s in _MINUS]
    failures = []
    for i, (s, k) in enumerate(targets):
        want = img[index_of((int(s[0]), int(s[1])))].scale(k)
        if dH[i] != want:
            failures.append(i)
    return Verdict(not failures, {"sign": sign, "identities": len(targets), "failing": failures})


def pairing_scale(sign: str) -> list[int]:
    """Diagonal relating restricted gradients to fixed-locus dual coordinates."""
    return [1, 2, 2, 2, 2] if sign == "+" else [2, 2, 2, 2]


# -- the Segre restriction --------------------------------------------------

def segre_restriction(params: CobleParams) -> MultiPoly:
    return build_cubic(params).substitute_linear(fixed_loci(params.field).gamma_plus)


def segre_groups(f: FieldSpec) -> list[MultiPoly]:
    """Y0^3 + 2 sum Yi^3, then Y0 Yk^2 + 2 (product of the other three), k = 1..4."""
    Y = MultiPoly.variables(5, f)
    first = Y[0] ** 3
    for y in Y[1:]:
        first = first + (y**3).scale(2)
    out = [first]
    for k in range(1, 5):
        rest = [Y[j] for j in range(1, 5) if j != k]
        out.append(Y[0] * Y[k] ** 2 + (rest[0] * rest[1] * rest[2]).scale(2))
    return out


def segre_display(params: CobleParams) -> MultiPoly:
    """a0/3 * group0 + 2 a_k * group_k, written out independently of the substitution."""
    f = params.field
    a = params.alpha
    coeffs = [f.div(a[0], f.coerce(3))] + [f.mul(f.coerce(2), x) for x in a[1:]]
    S = MultiPoly.zero(5, f)
    for c, g in zip(coeffs, segre_groups(f)):
        S = S + g.scale_raw(c)
    return S


def segre_groups_rank(f: FieldSpec) -> int:
    mons = monomial_basis(5, 3)
    rows = [[g.terms.get(e, f.zero()) for e in mons] for g in segre_groups(f)]
    return MatrixF(rows, f, raw=True).rank()


# -- closed-form integers ---------------------------------------------------

def sigma_degree(t5: int, t41: int, t32: int) -> int:
    """(A + B)^5 with B^3 = 0: C(5,0) A^5 + C(5,1) A^4 B + C(5,2) A^3 B^2."""
    return comb(5, 0) * t5 + comb(5, 1) * t41 + comb(5, 2) * t32


def secant_threefold_degree(curve_deg: int, genus: int) -> int:
    """Nodes of a plane projection: arithmetic genus of a plane curve minus the geometric genus."""
    return (curve_deg - 1) * (curve_deg - 2) // 2 - genus
