"""The Schrodinger action of (F_3)^4 on nine coordinates and the involution tau.

Coordinates are indexed by b in (F_3)^2, in the fixed order
00, 01, 02, 10, 11, 12, 20, 21, 22.

Convention: the element g = (a, a*) sends X_b to w^<a*, b> X_{b+a}, with
<u, v> = u1 v1 + u2 v2 mod 3 and w the field's cube root of unity returned by
:func:`coblelab.fields.cube_root_of_unity`.  Any symplectically equivalent
convention gives the same invariant spaces; this one is fixed everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

from coblelab.fields import FieldSpec, cube_root_of_unity
from coblelab.linalg import MatrixF
from coblelab.multipoly import MultiPoly, monomial_basis

__all__ = [
    "INDEX",
    "index_of",
    "HeisenbergElement",
    "Involution",
    "TAU",
    "generators",
    "act",
    "tau_act",
    "is_invariant",
    "invariant_subspace",
    "c3_groups",
    "CONVENTION",
]

CONVENTION = "X_b -> w^<a*,b> X_{b+a}, <u,v> = u1*v1 + u2*v2 mod 3"

INDEX: tuple[tuple[int, int], ...] = tuple((i, j) for i in range(3) for j in range(3))
_POS = {b: n for n, b in enumerate(INDEX)}


def index_of(b) -> int:
    return _POS[(b[0] % 3, b[1] % 3)]


def _pair(u, v) -> int:
    return (u[0] * v[0] + u[1] * v[1]) % 3


@dataclass(frozen=True)
class HeisenbergElement:
    a: tuple[int, int] = (0, 0)
    astar: tuple[int, int] = (0, 0)

    def __post_init__(self):
        object.__setattr__(self, "a", (self.a[0] % 3, self.a[1] % 3))
        object.__setattr__(self, "astar", (self.astar[0] % 3, self.astar[1] % 3))

    def compose(self, other: "HeisenbergElement") -> tuple["HeisenbergElement", int]:
        """act(self, act(other, F)) = w^k act(g, F); returns (g, k)."""
        g = HeisenbergElement(
            (self.a[0] + other.a[0], self.a[1] + other.a[1]),
            (self.astar[0] + other.astar[0], self.astar[1] + other.astar[1]),
        )
        return g, _pair(self.astar, other.a)

    def __mul__(self, other: "HeisenbergElement") -> "HeisenbergElement":
        return self.compose(other)[0]

    def permutation(self) -> list[int]:
        """Position of the image variable for each source variable."""
        return [index_of((b[0] + self.a[0], b[1] + self.a[1])) for b in INDEX]

    def phases(self) -> list[int]:
        return [_pair(self.astar, b) for b in INDEX]


@dataclass(frozen=True)
class Involution:
    """b -> -b on the index set."""

    def permutation(self) -> list[int]:
        return [index_of((-b[0], -b[1])) for b in INDEX]


TAU = Involution()


def generators() -> list[HeisenbergElement]:
    """Two characters first (they act diagonally), then two translations."""
    return [
        HeisenbergElement((0, 0), (1, 0)),
        HeisenbergElement((0, 0), (0, 1)),
        HeisenbergElement((1, 0), (0, 0)),
        HeisenbergElement((0, 1), (0, 0)),
    ]


def _check9(F: MultiPoly):
    if F.nvars != 9:
        raise ValueError("the Heisenberg action is defined on 9 variables")


def _permute_phase(F: MultiPoly, perm: list[int], phases: list[int] | None) -> MultiPoly:
    f = F.field
    w = cube_root_of_unity(f).v if phases is not None else None
    wpow = [f.one(), w, f.mul(w, w)] if w is not None else None
    terms = {}
    for e, c in F.terms.items():
        e2 = [0] * 9
        for i, k in enumerate(e):
            e2[perm[i]] = k
        if phases is not None:
            s = sum(k * ph for k, ph in zip(e, phases)) % 3
            c = f.mul(c, wpow[s])
        terms[tuple(e2)] = c
    return MultiPoly(9, terms, f, _trusted=True)


def act(g: HeisenbergElement, F: MultiPoly) -> MultiPoly:
    _check9(F)
    phases = g.phases()
    return _permute_phase(F, g.permutation(), phases if any(phases) else None)


def tau_act(F: MultiPoly) -> MultiPoly:
    _check9(F)
    return _permute_phase(F, TAU.permutation(), None)


def is_invariant(F: MultiPoly) -> dict:
    """Strict invariance under each generator; a mismatch reports the generator and the phase."""
    out = {"invariant": True, "failures": []}
    w = cube_root_of_unity(F.field).v
    f = F.field
    for g in generators():
        G = act(g, F)
        if G == F:
            continue
        phase = None
        for k, wk in ((1, w), (2, f.mul(w, w))):
            if G == F.scale_raw(wk):
                phase = k
        out["invariant"] = False
        out["failures"].append({"a": g.a, "astar": g.astar, "phase_exponent": phase})
    return out


def _vec(F: MultiPoly, pos: dict, n: int) -> list:
    v = [F.field.zero()] * n
    for e, c in F.terms.items():
        v[pos[e]] = c
    return v


def invariant_subspace(d: int, f: FieldSpec) -> list[MultiPoly]:
    """Basis of degree-d forms fixed by every generator, in reduced echelon form.

    The characters are diagonal on monomials, so their joint fixed space is
    spanned by the monomials of phase 1; the translations are then imposed by
    a nullspace computation of (rho(g) - id) on that span.
    """
    if not 0 <= d <= 6:
        raise ValueError("degree must be in 0..6")
    cube_root_of_unity(f)  # the action needs w
    mons = monomial_basis(9, d)
    pos = {e: i for i, e in enumerate(mons)}
    chars = [g for g in generators() if g.a == (0, 0)]
    trans = [g for g in generators() if g.a != (0, 0)]
    survivors = [
        e for e in mons if all(sum(k * ph for k, ph in zip(e, g.phases())) % 3 == 0 for g in chars)
    ]
    basis = [MultiPoly(9, {e: 1}, f, _trusted=True) for e in survivors]
    for g in trans:
        if not basis:
            break
        cols = [_vec(act(g, B) - B, pos, len(mons)) for B in basis]
        rows = [[cols[j][i] for j in range(len(cols))] for i in range(len(mons))]
        ns = MatrixF(rows, f, raw=True).nullspace()
        new = []
        for v in ns:
            acc = MultiPoly.zero(9, f)
            for c, B in zip(v, basis):
                if not f.is_zero(c):
                    acc = acc + B.scale_raw(c)
            new.append(acc)
        basis = new
    if not basis:
        return []
    # canonical reduced echelon form in the monomial basis
    M = MatrixF([_vec(B, pos, len(mons)) for B in basis], f, raw=True)
    R, piv = M._echelon(reduced=True)
    return [MultiPoly(9, {mons[j]: c for j, c in enumerate(row) if not f.is_zero(c)}, f, _trusted=True) for row in R]


def c3_groups(f: FieldSpec) -> list[MultiPoly]:
    """The five orbit sums of the invariant cubic family, without coefficients.

    Sum of cubes; the three rows; the three columns; and the two remaining
    parallel classes of affine lines in (F_3)^2.
    """
    X = MultiPoly.variables(9, f)

    def x(i, j):
        return X[index_of((i, j))]

    cubes = X[0] ** 3
    for v in X[1:]:
        cubes = cubes + v**3
    rows = x(0, 0) * x(0, 1) * x(0, 2) + x(1, 0) * x(1, 1) * x(1, 2) + x(2, 0) * x(2, 1) * x(2, 2)
    cols = x(0, 0) * x(1, 0) * x(2, 0) + x(0, 1) * x(1, 1) * x(2, 1) + x(0, 2) * x(1, 2) * x(2, 2)
    diag = x(0, 0) * x(1, 1) * x(2, 2) + x(0, 1) * x(1, 2) * x(2, 0) + x(1, 0) * x(2, 1) * x(0, 2)
    anti = x(0, 0) * x(1, 2) * x(2, 1) + x(0, 1) * x(1, 0) * x(2, 2) + x(0, 2) * x(1, 1) * x(2, 0)
    return [cubes, rows, cols, diag, anti]
