"""Exact fields: the rationals, prime fields F_p and extensions F_{p^k}.

Elements are handled in two layers.  Hot loops work on *raw* values owned by a
:class:`FieldSpec` (``Fraction`` for QQ, an ``int`` in ``[0, p)`` for F_p, and
an ``int`` code ``c_0 + c_1 p + ... + c_{k-1} p^{k-1}`` for F_{p^k}, the
digits being the coefficients of the residue class modulo the defining
polynomial).  :class:`FieldElem` wraps a raw value together with its field
and overloads the arithmetic operators; mixing fields raises.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FieldError",
    "FieldSpec",
    "FieldElem",
    "QQ",
    "GF",
    "arith",
    "cube_root_of_unity",
    "univariate_roots",
    "is_prime",
]

EXHAUSTIVE_LIMIT = 1 << 20
# below this field size roots are found by evaluating at every element
SCAN_LIMIT = 4096


class FieldError(ArithmeticError):
    """Raised for invalid field data, mixed-field operands and division by zero."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# univariate polynomials over F_p as low-to-high int lists (modulus handling)

def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    a = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        c = a[-1] * inv % p
        s = len(a) - len(b)
        q[s] = c
        for i, bi in enumerate(b):
            a[s + i] = (a[s + i] - c * bi) % p
        _fp_trim(a)
    return q, a


def _fp_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    r = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                r[i + j] = (r[i + j] + x * y) % p
    return _fp_divmod(_fp_trim(r), m, p)[1]


def _fp_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _fp_trim(list(a)), _fp_trim(list(b))
    while b:
        a, b = b, _fp_divmod(a, b, p)[1]
    return a


def _fp_irreducible(m: Sequence[int], p: int) -> bool:
    """Rabin-style test; for k <= 3 it reduces to the absence of roots."""
    m = [c % p for c in m]
    k = len(m) - 1
    if k == 1:
        return True
    if k <= 3:
        for x in range(p):
            v = 0
            for c in reversed(m):
                v = (v * x + c) % p
            if v == 0:
                return False
        return True
    xp = [0, 1]
    for _ in range(1, k // 2 + 1):
        # xp <- xp^p mod m
        res, base, e = [1], xp, p
        while e:
            if e & 1:
                res = _fp_mulmod(res, base, m, p)
            base = _fp_mulmod(base, base, m, p)
            e >>= 1
        xp = res
        diff = list(xp) + [0] * max(0, 2 - len(xp))
        diff[1] = (diff[1] - 1) % p
        if len(_fp_gcd(m, _fp_trim(diff), p)) > 1:
            return False
    return True


def first_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible of degree k (high coefficients first)."""
    import itertools

    for tail in itertools.product(range(p), repeat=k):
        # tail = (c_{k-1}, ..., c_0)
        m = list(reversed(tail)) + [1]
        if m[0] == 0:
            continue
        if _fp_irreducible(m, p):
            return tuple(m)
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")


class FieldSpec:
    """An exact computational field.

    Use the constructors :meth:`rational`, :meth:`prime` and :meth:`extension`
    (or the shorthands :data:`QQ` and :func:`GF`).  Instances are immutable
    and compare equal when they describe the same field and representation.
    """

    __slots__ = ("kind", "p", "k", "modulus", "q", "__dict__")

    def __init__(self, kind: str, p: int = 0, k: int = 1, modulus: tuple[int, ...] | None = None):
        if kind not in ("rational", "prime", "extension"):
            raise FieldError(f"unknown field kind {kind!r}")
        if kind != "rational":
            if not (2 <= p < 2**31) or not is_prime(p):
                raise FieldError(f"{p} is not a prime below 2^31")
        if kind == "extension":
            if k < 1:
                raise FieldError("extension degree must be >= 1")
            if modulus is None:
                modulus = first_irreducible(p, k) if k > 1 else (0, 1)
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != k + 1 or modulus[-1] != 1:
                raise FieldError("modulus must be monic of degree k (low-to-high coefficients)")
            if not _fp_irreducible(list(modulus), p):
                raise FieldError(f"modulus {modulus} is reducible over F_{p}")
        else:
            k = 1
            modulus = None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "q", p**k if kind != "rational" else 0)

    def __setattr__(self, name, value):
        if name in FieldSpec.__slots__:
            raise AttributeError("FieldSpec is immutable")
        object.__setattr__(self, name, value)

    # -- constructors ------------------------------------------------------
    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls("rational")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("prime", p)

    @classmethod
    def extension(cls, p: int, k: int, modulus: Sequence[int] | None = None) -> "FieldSpec":
        return cls("extension", p, k, tuple(modulus) if modulus is not None else None)

    # -- identity ----------------------------------------------------------
    def _key(self):
        return (self.kind, self.p, self.k, self.modulus)

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FieldSpec({self.to_string()})"

    def to_string(self) -> str:
        if self.kind == "rational":
            return "QQ"
        if self.kind == "prime":
            return f"GF({self.p})"
        return f"GF({self.p}^{self.k};{','.join(map(str, self.modulus))})"

    @classmethod
    def from_string(cls, s: str) -> "FieldSpec":
        s = s.strip()
        if s == "QQ":
            return QQ
        if not (s.startswith("GF(") and s.endswith(")")):
            raise FieldError(f"cannot parse field spec {s!r}")
        body = s[3:-1]
        if "^" not in body:
            return cls.prime(int(body))
        head, _, mod = body.partition(";")
        p, k = (int(t) for t in head.split("^"))
        modulus = tuple(int(t) for t in mod.split(",")) if mod else None
        return cls.extension(p, k, modulus)

    # -- structure ---------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.kind != "rational"

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def prime_subfield(self) -> "FieldSpec":
        return GF(self.p)

    def zero(self):
        return Fraction(0) if self.kind == "rational" else 0

    def one(self):
        return Fraction(1) if self.kind == "rational" else 1

    def coerce(self, x):
        """Map an int, Fraction or FieldElem of this field to a raw value."""
        if isinstance(x, FieldElem):
            if x.field != self:
                raise FieldError(f"element of {x.field.to_string()} used in {self.to_string()}")
            return x.v
        if self.kind == "rational":
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise FieldError(f"{x} has no image in {self.to_string()}")
            return self.div(x.numerator % self.p, x.denominator % self.p)
        if isinstance(x, (int, np.integer)):
            return int(x) % self.p  # the prime subfield sits at codes 0..p-1
        raise FieldError(f"cannot coerce {x!r} into {self.to_string()}")

    def __call__(self, x) -> "FieldElem":
        return FieldElem(self, self.coerce(x))

    def elements(self) -> Iterable[int]:
        if not self.is_finite:
            raise FieldError("QQ is infinite")
        return range(self.q)

    def random(self, rng: random.Random, nonzero: bool = False):
        if self.kind == "rational":
            while True:
                x = Fraction(rng.randint(-50, 50), rng.randint(1, 12))
                if x or not nonzero:
                    return x
        return rng.randrange(1 if nonzero else 0, self.q)

    # -- digit helpers for extensions --------------------------------------
    def _digits(self, a: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.k):
            a, r = divmod(a, p)
            out.append(r)
        return out

    def _undigits(self, d: Sequence[int]) -> int:
        a = 0
        for c in reversed(d):
            a = a * self.p + c
        return a

    @cached_property
    def _tables(self):
        """exp/log tables for small extensions (q <= 2^20)."""
        q = self.q
        g = self._primitive_element_slow()
        exp = np.zeros(q - 1, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = self._mul_slow(x, g)
        return exp, log

    def _use_tables(self) -> bool:
        return self.kind == "extension" and self.k > 1 and self.q <= EXHAUSTIVE_LIMIT

    def _mul_slow(self, a: int, b: int) -> int:
        p, k, m = self.p, self.k, self.modulus
        da, db = self._digits(a), self._digits(b)
        r = [0] * (2 * k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    r[i + j] += x * y
        for i in range(2 * k - 2, k - 1, -1):
            c = r[i] % p
            if c:
                for j in range(k):
                    r[i - k + j] -= c * m[j]
        return self._undigits([c % p for c in r[:k]])

    def _primitive_element_slow(self) -> int:
        q = self.q
        fac = _prime_factors(q - 1)
        for g in range(2, q):
            if all(self._pow_slow(g, (q - 1) // r) != 1 for r in fac):
                return g
        return 1  # q == 2

    def _pow_slow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._mul_slow(r, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return r

    # -- scalar arithmetic on raw values -----------------------------------
    def add(self, a, b):
        if self.kind == "extension":
            if self.k == 1:
                return (a + b) % self.p
            p = self.p
            return self._undigits([(x + y) % p for x, y in zip(self._digits(a), self._digits(b))])
        if self.kind == "prime":
            return (a + b) % self.p
        return a + b

    def neg(self, a):
        if self.kind == "extension" and self.k > 1:
            p = self.p
            return self._undigits([(-x) % p for x in self._digits(a)])
        if self.kind == "rational":
            return -a
        return (-a) % self.p

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.kind == "prime" or (self.kind == "extension" and self.k == 1):
            return a * b % self.p
        if self.kind == "rational":
            return a * b
        if a == 0 or b == 0:
            return 0
        if self._use_tables():
            exp, log = self._tables
            return int(exp[(log[a] + log[b]) % (self.q - 1)])
        return self._mul_slow(a, b)

    def inv(self, a):
        if self.is_zero(a):
            raise FieldError("division by zero")
        if self.kind == "rational":
            return 1 / a
        if self.k == 1:
            return pow(a, -1, self.p)
        if self._use_tables():
            exp, log = self._tables
            return int(exp[(-log[a]) % (self.q - 1)])
        return self.pow(a, self.q - 2)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.kind == "rational":
            return a**e
        if self.k == 1:
            return pow(a, e, self.p)
        if a == 0:
            return 1 if e == 0 else 0
        if self._use_tables():
            exp, log = self._tables
            return int(exp[(int(log[a]) * e) % (self.q - 1)])
        return self._pow_slow(a, e)

    def is_zero(self, a) -> bool:
        return a == 0

    def sum(self, xs):
        acc = self.zero()
        for x in xs:
            acc = self.add(acc, x)
        return acc

    # -- vectorised arithmetic on numpy int64 arrays of raw codes ----------
    def vadd(self, a, b):
        p = self.p
        if self.k == 1:
            return (a + b) % p
        if self.k == 2:
            a0, a1 = np.divmod(a, p)[1], a // p
            b0, b1 = np.divmod(b, p)[1], b // p
            return (a0 + b0) % p + p * ((a1 + b1) % p)
        out = np.zeros_like(a)
        pk = 1
        for _ in range(self.k):
            out += ((a // pk) % p + (b // pk) % p) % p * pk
            pk *= p
        return out

    def vneg(self, a):
        p = self.p
        if self.k == 1:
            return (-a) % p
        out = np.zeros_like(a)
        pk = 1
        for _ in range(self.k):
            out += ((-(a // pk)) % p) * pk
            pk *= p
        return out

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        if self.k == 1:
            return a * b % self.p
        if not self._use_tables():
            if self.k == 2 and self.p < 2**26:
                # (a0 + a1 x)(b0 + b1 x) with x^2 = -m1 x - m0
                p = self.p
                m0, m1 = self.modulus[0], self.modulus[1]
                a = np.asarray(a, dtype=np.int64)
                b = np.asarray(b, dtype=np.int64)
                a0, a1 = a % p, a // p
                b0, b1 = b % p, b // p
                hi = a1 * b1 % p
                c0 = (a0 * b0 - hi * m0) % p
                c1 = (a0 * b1 % p + a1 * b0 % p - hi * m1) % p
                return c0 + p * c1
            raise FieldError("vectorised arithmetic needs q <= 2^20 for extensions")
        exp, log = self._tables
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        la, lb = log[a], log[b]
        r = exp[(la + lb) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, r)

    def vinv(self, a):
        """Elementwise inverse; zero entries map to zero."""
        a = np.asarray(a, dtype=np.int64)
        if self.k > 1 and self._use_tables():
            exp, log = self._tables
            return np.where(a == 0, 0, exp[(-log[a]) % (self.q - 1)])
        e = self.q - 2
        r = np.ones_like(a)
        base = a.copy()
        while e:
            if e & 1:
                r = self.vmul(r, base)
            base = self.vmul(base, base)
            e >>= 1
        return np.where(a == 0, 0, r)

    def vmul_scalar(self, a, c):
        return self.vmul(a, np.full_like(a, c))


QQ = FieldSpec.rational()


_GF_CACHE: dict = {}


def GF(p: int, k: int = 1, modulus: Sequence[int] | None = None) -> FieldSpec:
    """F_p for ``k == 1``; otherwise F_{p^k} with the lexicographically first modulus."""
    key = (p, k, tuple(modulus) if modulus is not None else None)
    f = _GF_CACHE.get(key)
    if f is None:
        f = FieldSpec.prime(p) if k == 1 and modulus is None else FieldSpec.extension(p, k, modulus)
        _GF_CACHE[key] = f
    return f


class FieldElem:
    """A field element bound to its :class:`FieldSpec`."""

    __slots__ = ("field", "v")

    def __init__(self, field: FieldSpec, v):
        self.field = field
        self.v = v

    def _other(self, other):
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise FieldError(
                    f"mixed-field operands: {self.field.to_string()} and {other.field.to_string()}"
                )
            return other.v
        return self.field.coerce(other)

    def __add__(self, o):
        return FieldElem(self.field, self.field.add(self.v, self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return FieldElem(self.field, self.field.sub(self.v, self._other(o)))

    def __rsub__(self, o):
        return FieldElem(self.field, self.field.sub(self._other(o), self.v))

    def __mul__(self, o):
        return FieldElem(self.field, self.field.mul(self.v, self._other(o)))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return FieldElem(self.field, self.field.div(self.v, self._other(o)))

    def __rtruediv__(self, o):
        return FieldElem(self.field, self.field.div(self._other(o), self.v))

    def __neg__(self):
        return FieldElem(self.field, self.field.neg(self.v))

    def __pow__(self, e: int):
        return FieldElem(self.field, self.field.pow(self.v, e))

    def inverse(self) -> "FieldElem":
        return FieldElem(self.field, self.field.inv(self.v))

    def __eq__(self, o):
        if isinstance(o, FieldElem):
            return self.field == o.field and self.v == o.v
        try:
            return self.v == self.field.coerce(o)
        except FieldError:
            return NotImplemented

    def __hash__(self):
        return hash((self.field, self.v))

    def __bool__(self):
        return not self.field.is_zero(self.v)

    def __int__(self):
        return int(self.v)

    def __repr__(self):
        return f"{self.v} in {self.field.to_string()}"


def arith(a: FieldElem, b: FieldElem, op: str) -> FieldElem:
    """Exact binary arithmetic, ``op`` one of add/sub/mul/div."""
    if a.field != b.field:
        raise FieldError(f"mixed-field operands: {a.field.to_string()} and {b.field.to_string()}")
    try:
        fn = {"add": a.field.add, "sub": a.field.sub, "mul": a.field.mul, "div": a.field.div}[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return FieldElem(a.field, fn(a.v, b.v))


def cube_root_of_unity(f: FieldSpec) -> FieldElem:
    """Smallest code w != 1 with w^3 = 1."""
    if not f.is_finite:
        raise FieldError("QQ has no primitive cube root of unity")
    if (f.q - 1) % 3 != 0:
        raise FieldError(
            f"{f.to_string()} has no primitive cube root of unity: q = {f.q} is not 1 mod 3"
        )
    if f.k == 1:
        # w = g^((p-1)/3) for any non-cube g; the smaller of w, w^2 is returned
        for g in range(2, f.p):
            w = pow(g, (f.p - 1) // 3, f.p)
            if w != 1:
                return FieldElem(f, min(w, w * w % f.p))
    for w in range(2, f.q):
        if f.pow(w, 3) == 1:
            return FieldElem(f, w)
    raise FieldError("unreachable")  # pragma: no cover


# ---------------------------------------------------------------------------
# univariate polynomials over an arbitrary finite FieldSpec (raw, low-to-high)

def upoly_trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def upoly_divmod(f: FieldSpec, a: list, b: list) -> tuple[list, list]:
    a = list(a)
    inv = f.inv(b[-1])
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        c = f.mul(a[-1], inv)
        s = len(a) - len(b)
        q[s] = c
        for i, bi in enumerate(b):
            if bi:
                a[s + i] = f.sub(a[s + i], f.mul(c, bi))
        upoly_trim(a)
    return q, a


def upoly_mul(f: FieldSpec, a: list, b: list) -> list:
    if not a or not b:
        return []
    r = [f.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    r[i + j] = f.add(r[i + j], f.mul(x, y))
    return upoly_trim(r)


def upoly_mulmod(f: FieldSpec, a: list, b: list, m: list) -> list:
    return upoly_divmod(f, upoly_mul(f, a, b), m)[1]


def upoly_powmod(f: FieldSpec, a: list, e: int, m: list) -> list:
    res = [f.one()]
    base = upoly_divmod(f, a, m)[1]
    while e:
        if e & 1:
            res = upoly_mulmod(f, res, base, m)
        base = upoly_mulmod(f, base, base, m)
        e >>= 1
    return res


def upoly_monic(f: FieldSpec, a: list) -> list:
    inv = f.inv(a[-1])
    return [f.mul(c, inv) for c in a]


def upoly_gcd(f: FieldSpec, a: list, b: list) -> list:
    a, b = upoly_trim(list(a)), upoly_trim(list(b))
    while b:
        a, b = b, upoly_divmod(f, a, b)[1]
    return upoly_monic(f, a) if a else a


def upoly_eval(f: FieldSpec, a: Sequence, x):
    acc = f.zero()
    for c in reversed(a):
        acc = f.add(f.mul(acc, x), c)
    return acc


def _roots_exhaustive(f: FieldSpec, c: list) -> list[int]:
    xs = np.arange(f.q, dtype=np.int64)
    acc = np.zeros(f.q, dtype=np.int64)
    for coef in reversed(c):
        acc = f.vadd(f.vmul(acc, xs), np.full(f.q, coef, dtype=np.int64))
    return [int(x) for x in np.nonzero(acc == 0)[0]]


def _split_roots(f: FieldSpec, g: list, rng: random.Random) -> list:
    """Roots of a monic squarefree g that splits into distinct linear factors (Cantor-Zassenhaus)."""
    d = len(g) - 1
    if d == 0:
        return []
    if d == 1:
        return [f.neg(g[0])]
    if f.p == 2:
        raise FieldError("equal-degree splitting in characteristic 2 is not implemented")
    while True:
        h = [f.random(rng), f.one()]
        h = list(upoly_powmod(f, h, (f.q - 1) // 2, g)) or [f.zero()]
        h[0] = f.sub(h[0], f.one())
        upoly_trim(h)
        if not h:
            continue
        u = upoly_gcd(f, g, h)
        if 0 < len(u) - 1 < d:
            v = upoly_divmod(f, g, u)[0]
            return _split_roots(f, u, rng) + _split_roots(f, upoly_monic(f, v), rng)


def univariate_roots(c: Sequence, f: FieldSpec, seed: int = 0) -> list[FieldElem]:
    """Distinct roots in ``f`` of ``c[0] + c[1] x + ...``, sorted by canonical code."""
    return [FieldElem(f, r) for r in roots_raw([f.coerce(x) for x in c], f, seed)]


def roots_raw(c: Sequence, f: FieldSpec, seed: int = 0) -> list:
    if not f.is_finite:
        raise FieldError("root finding needs a finite field")
    c = upoly_trim(list(c))
    if not c:
        raise FieldError("the zero polynomial has every element as a root")
    if len(c) == 1:
        return []
    if f.q <= SCAN_LIMIT:
        return _roots_exhaustive(f, c)
    g = upoly_monic(f, c)
    xq = upoly_powmod(f, [f.zero(), f.one()], f.q, g)
    xq = list(xq) + [f.zero()] * max(0, 2 - len(xq))
    xq[1] = f.sub(xq[1], f.one())
    upoly_trim(xq)
    split = upoly_gcd(f, g, xq) if xq else g
    roots = _split_roots(f, split, random.Random(seed))
    return sorted(set(roots))
