"""Exact arithmetic in finite commutative rings.

A ring is a direct sum of Galois rings GR(p^m, r) = Z_{p^m}[x]/(f) with f
monic of degree r and irreducible mod p.  Elements are per-summand coefficient
vectors.  This representation covers Z_n (via CRT over the prime factorization
of n), finite fields GF(p^r) (m = 1) and their mixtures, and it supports
Teichmuller digit decomposition and lifted Frobenius automorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    FactorizationTooLarge,
    NonPrimeP,
    NonUnit,
    ReducibleModulus,
    RingMismatch,
)

FACTOR_LIMIT = 1 << 48


# ---------------------------------------------------------------------------
# integer helpers
# ---------------------------------------------------------------------------

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = _gcd(abs(x - y), n)
        if d != n:
            return d
    raise FactorizationTooLarge(f"cannot factor {n}")


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of n (n < 2^48), as {prime: multiplicity}."""
    if n >= FACTOR_LIMIT:
        raise FactorizationTooLarge(f"{n} >= 2^48")
    out: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = m
        while d == m:
            d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


# ---------------------------------------------------------------------------
# polynomial helpers over Z_q, coefficient tuples of fixed length r
# ---------------------------------------------------------------------------

def _padd(a: tuple, b: tuple, q: int) -> tuple:
    if len(a) == 1:
        return ((a[0] + b[0]) % q,)
    return tuple((x + y) % q for x, y in zip(a, b))


def _psub(a: tuple, b: tuple, q: int) -> tuple:
    if len(a) == 1:
        return ((a[0] - b[0]) % q,)
    return tuple((x - y) % q for x, y in zip(a, b))


def _pneg(a: tuple, q: int) -> tuple:
    return tuple((-x) % q for x in a)


def _preduce(prod: list, modulus: tuple, q: int) -> tuple:
    """Reduce an unreduced product (length 2r-1) by the monic modulus, mod q."""
    r = len(modulus) - 1
    for d in range(len(prod) - 1, r - 1, -1):
        c = prod[d] % q
        if c:
            prod[d] = 0
            for j in range(r):
                prod[d - r + j] -= c * modulus[j]
    out = prod[:r] + [0] * (r - len(prod))
    return tuple(c % q for c in out[:r])


def _pmul(a: tuple, b: tuple, modulus: tuple, q: int) -> tuple:
    """Product reduced by the monic modulus, then mod q."""
    r = len(a)
    if r == 1:
        return ((a[0] * b[0]) % q,)
    prod = [0] * (2 * r - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    return _preduce(prod, modulus, q)


def _ppow(a: tuple, e: int, modulus: tuple, q: int) -> tuple:
    r = len(a)
    out = tuple([1] + [0] * (r - 1))
    base = a
    while e:
        if e & 1:
            out = _pmul(out, base, modulus, q)
        base = _pmul(base, base, modulus, q)
        e >>= 1
    return out


# polynomial arithmetic over F_p with variable length (for irreducibility)

def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    return _fp_mod(prod, f, p)


def _fp_mod(a: list[int], f: list[int], p: int) -> list[int]:
    a = [c % p for c in a]
    df = len(f) - 1
    inv_lead = pow(f[-1], -1, p)
    while len(a) - 1 >= df and _fp_trim(a):
        da = len(a) - 1
        if da < df:
            break
        c = a[-1] * inv_lead % p
        for j in range(df + 1):
            a[da - df + j] = (a[da - df + j] - c * f[j]) % p
        _fp_trim(a)
    return a


def _fp_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p
           for i in range(n)]
    return _fp_trim(out)


def _fp_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = list(a), list(b)
    _fp_trim(a)
    _fp_trim(b)
    while b:
        a = _fp_mod(a, b, p)
        a, b = b, a
    return a


def _fp_powmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    out = [1]
    base = list(a)
    while e:
        if e & 1:
            out = _fp_mulmod(out, base, f, p)
        base = _fp_mulmod(base, base, f, p)
        e >>= 1
    return out


def is_irreducible_mod_p(coeffs: tuple, p: int) -> bool:
    """Rabin test for a monic polynomial given by (c_0..c_r), c_r = 1."""
    f = [c % p for c in coeffs]
    r = len(f) - 1
    if r < 1 or f[-1] != 1:
        return False
    if r == 1:
        return True
    x = [0, 1]
    # x^(p^r) == x mod f
    y = list(x)
    for _ in range(r):
        y = _fp_powmod(y, p, f, p)
    if _fp_sub(y, x, p):
        return False
    for d in sorted(factorize(r)):
        y = list(x)
        for _ in range(r // d):
            y = _fp_powmod(y, p, f, p)
        g = _fp_gcd(_fp_sub(y, x, p), f, p)
        if len(g) - 1 >= 1:
            return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p: int, r: int) -> tuple:
    """Lexicographically least monic degree-r polynomial irreducible mod p."""
    if r == 1:
        return (0, 1)
    # iterate coefficient vectors (c_0, ..., c_{r-1}) in lex order
    for idx in range(p ** r):
        coeffs = []
        v = idx
        for _ in range(r):
            coeffs.append(v % p)
            v //= p
        cand = tuple(coeffs) + (1,)
        if is_irreducible_mod_p(cand, p):
            return cand
    raise ReducibleModulus(f"no irreducible polynomial of degree {r} mod {p}")


# ---------------------------------------------------------------------------
# ring specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaloisRingSpec:
    """GR(p^m, r) presented as Z_{p^m}[x]/(modulus)."""
    p: int
    m: int
    r: int
    modulus: tuple  # (c_0, ..., c_r), monic, coefficients in [0, p^m)

    @property
    def q(self) -> int:
        """Characteristic p^m."""
        return self.p ** self.m

    @property
    def order(self) -> int:
        return self.p ** (self.m * self.r)

    @property
    def residue_order(self) -> int:
        """Order p^r of the residue field."""
        return self.p ** self.r

    def units_order(self) -> int:
        return (self.p ** self.r - 1) * self.p ** (self.r * (self.m - 1))

    def zero(self) -> tuple:
        return (0,) * self.r

    def one(self) -> tuple:
        return (1,) + (0,) * (self.r - 1)


def _validate_summand(g: GaloisRingSpec) -> GaloisRingSpec:
    if not is_prime(g.p):
        raise NonPrimeP(f"p = {g.p} is not prime")
    if g.m < 1 or g.r < 1:
        raise ReducibleModulus("m and r must be positive")
    if len(g.modulus) != g.r + 1 or g.modulus[-1] != 1:
        raise ReducibleModulus(f"modulus must be monic of degree {g.r}")
    if any(not (0 <= c < g.q) for c in g.modulus[:-1]):
        raise ReducibleModulus("modulus coefficients out of range")
    if not is_irreducible_mod_p(g.modulus, g.p):
        raise ReducibleModulus(f"modulus {g.modulus} reducible mod {g.p}")
    return g


def _summand_key(g: GaloisRingSpec):
    return (g.p, g.m, g.r, g.modulus)


@dataclass(frozen=True)
class RingSpec:
    """A direct sum of Galois rings, canonically ordered."""
    summands: tuple[GaloisRingSpec, ...]

    @property
    def order(self) -> int:
        n = 1
        for g in self.summands:
            n *= g.order
        return n

    def units_count(self) -> int:
        n = 1
        for g in self.summands:
            n *= g.units_order()
        return n

    def zero(self) -> "RingElement":
        return RingElement(self, tuple(g.zero() for g in self.summands))

    def one(self) -> "RingElement":
        return RingElement(self, tuple(g.one() for g in self.summands))

    def element(self, coeffs) -> "RingElement":
        coeffs = tuple(tuple(c % g.q for c in cs)
                       for g, cs in zip(self.summands, coeffs))
        if len(coeffs) != len(self.summands) or any(
                len(cs) != g.r for g, cs in zip(self.summands, coeffs)):
            raise RingMismatch("coefficient shape does not match ring")
        return RingElement(self, coeffs)

    def from_int(self, n: int) -> "RingElement":
        """Image of the integer n under the unique map Z -> R."""
        return RingElement(self, tuple(
            (n % g.q,) + (0,) * (g.r - 1) for g in self.summands))

    def to_int(self, a: "RingElement") -> int:
        """CRT recombination; defined only when every summand has r = 1."""
        if any(g.r != 1 for g in self.summands):
            raise RingMismatch("to_int needs rank-1 summands")
        n, mod = 0, 1
        for g, cs in zip(self.summands, a.coeffs):
            q = g.q
            # solve x = n (mod mod), x = cs[0] (mod q); moduli coprime
            t = (cs[0] - n) * pow(mod, -1, q) % q
            n, mod = n + mod * t, mod * q
        return n % mod

    def enumerate(self):
        """All elements, in canonical order (desk-scale rings only)."""
        def per_summand(g: GaloisRingSpec):
            for idx in range(g.order):
                coeffs, v = [], idx
                for _ in range(g.r):
                    coeffs.append(v % g.q)
                    v //= g.q
                yield tuple(coeffs)

        def rec(i):
            if i == len(self.summands):
                yield ()
                return
            for rest in rec(i + 1):
                for c in per_summand(self.summands[i]):
                    yield (c,) + rest

        for coeffs in rec(0):
            yield RingElement(self, coeffs)


def direct_sum_specs(parts: list[GaloisRingSpec]) -> tuple[RingSpec, list[int]]:
    """Canonically ordered direct sum; returns (ring, position of each input)."""
    order = sorted(range(len(parts)), key=lambda i: _summand_key(parts[i]))
    positions = [0] * len(parts)
    for pos, i in enumerate(order):
        positions[i] = pos
    return RingSpec(tuple(parts[i] for i in order)), positions


def ring_make(kind: str, *params) -> RingSpec:
    """Construct a ring.

    kinds: ("integer-residue", n), ("galois", p, m, r[, modulus]),
    ("field", q), ("direct-sum", spec, spec, ...).
    """
    if kind == "integer-residue":
        (n,) = params
        if n < 2:
            raise NonPrimeP(f"modulus {n} < 2")
        fac = factorize(n)
        parts = [GaloisRingSpec(p, m, 1, (0, 1)) for p, m in sorted(fac.items())]
        return direct_sum_specs(parts)[0]
    if kind == "galois":
        p, m, r = params[0], params[1], params[2]
        modulus = tuple(params[3]) if len(params) > 3 else None
        if modulus is None:
            if not is_prime(p):
                raise NonPrimeP(f"p = {p} is not prime")
            base = default_modulus(p, r)
            modulus = tuple(c % (p ** m) for c in base)
        g = _validate_summand(GaloisRingSpec(p, m, r, modulus))
        return RingSpec((g,))
    if kind == "field":
        (q,) = params
        fac = factorize(q)
        if len(fac) != 1:
            raise NonPrimeP(f"{q} is not a prime power")
        p, r = next(iter(fac.items()))
        return ring_make("galois", p, 1, r)
    if kind == "direct-sum":
        parts = []
        for spec in params:
            parts.extend(spec.summands)
        for g in parts:
            _validate_summand(g)
        return direct_sum_specs(parts)[0]
    raise NonPrimeP(f"unknown ring kind {kind!r}")


def Zmod(n: int) -> RingSpec:
    return ring_make("integer-residue", n)


def field(q: int) -> RingSpec:
    return ring_make("field", q)


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingElement:
    ring: RingSpec
    coeffs: tuple  # per-summand coefficient tuples

    def __add__(self, other: "RingElement") -> "RingElement":
        return ring_add(self, other)

    def __sub__(self, other: "RingElement") -> "RingElement":
        _check(self, other)
        return RingElement(self.ring, tuple(
            _psub(a, b, g.q) for g, a, b in
            zip(self.ring.summands, self.coeffs, other.coeffs)))

    def __neg__(self) -> "RingElement":
        return RingElement(self.ring, tuple(
            _pneg(a, g.q) for g, a in zip(self.ring.summands, self.coeffs)))

    def __mul__(self, other: "RingElement") -> "RingElement":
        return ring_mul(self, other)

    def is_zero(self) -> bool:
        return all(all(c == 0 for c in cs) for cs in self.coeffs)

    def is_one(self) -> bool:
        return self == self.ring.one()

    def is_unit(self) -> bool:
        """Unit iff the residue mod p is nonzero in every summand."""
        return all(any(c % g.p for c in cs)
                   for g, cs in zip(self.ring.summands, self.coeffs))

    def inv(self) -> "RingElement":
        return ring_inv(self)

    def pow(self, e: int) -> "RingElement":
        if e < 0:
            return ring_inv(self).pow(-e)
        out = self.ring.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out


def _check(a: RingElement, b: RingElement) -> None:
    if a.ring != b.ring:
        raise RingMismatch("elements live in different rings")


def ring_add(a: RingElement, b: RingElement) -> RingElement:
    _check(a, b)
    return RingElement(a.ring, tuple(
        _padd(x, y, g.q) for g, x, y in
        zip(a.ring.summands, a.coeffs, b.coeffs)))


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    _check(a, b)
    return RingElement(a.ring, tuple(
        _pmul(x, y, g.modulus, g.q) for g, x, y in
        zip(a.ring.summands, a.coeffs, b.coeffs)))


def ring_inv(a: RingElement) -> RingElement:
    """Inverse of a unit, via the unit-group order per summand."""
    if not a.is_unit():
        raise NonUnit("not a unit (zero divisor or nilpotent)")
    return RingElement(a.ring, tuple(
        _ppow(cs, g.units_order() - 1, g.modulus, g.q)
        for g, cs in zip(a.ring.summands, a.coeffs)))


# ---------------------------------------------------------------------------
# Teichmuller digits and Frobenius
# ---------------------------------------------------------------------------

def _teich_lift(cs: tuple, g: GaloisRingSpec) -> tuple:
    """The unique t in T u {0} with t = cs mod p (t = cs^(p^(r(m-1))))."""
    if g.m == 1:
        return cs
    return _ppow(cs, g.p ** (g.r * (g.m - 1)), g.modulus, g.q)


def _teich_digits(cs: tuple, g: GaloisRingSpec) -> list[tuple]:
    digits = []
    cur = cs
    for _ in range(g.m):
        t = _teich_lift(cur, g)
        digits.append(t)
        diff = _psub(cur, t, g.q)
        # every coefficient of an element of pR is divisible by p
        cur = tuple(c // g.p for c in diff)
    return digits


def teichmuller_decompose(a: RingElement) -> list[list[tuple]]:
    """Per summand, the digits (t_0..t_{m-1}) with a = sum t_i p^i, t_i in T u {0}."""
    return [
        _teich_digits(cs, g)
        for g, cs in zip(a.ring.summands, a.coeffs)
    ]


def teichmuller_recompose(ring: RingSpec, digits: list[list[tuple]]) -> RingElement:
    out = []
    for g, ds in zip(ring.summands, digits):
        acc = g.zero()
        pk = 1
        for t in ds:
            acc = _padd(acc, tuple(c * pk % g.q for c in t), g.q)
            pk *= g.p
        out.append(acc)
    return RingElement(ring, tuple(out))


@dataclass(frozen=True)
class RingAutomorphism:
    """A lifted Frobenius: per summand, digits map t -> t^(p^e)."""
    ring: RingSpec
    exponents: tuple[int, ...]

    def __post_init__(self):
        for g, e in zip(self.ring.summands, self.exponents):
            if not (0 <= e < g.r):
                raise RingMismatch(f"Frobenius exponent {e} out of range for r={g.r}")

    def is_identity(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def compose(self, other: "RingAutomorphism") -> "RingAutomorphism":
        if self.ring != other.ring:
            raise RingMismatch("automorphisms of different rings")
        return RingAutomorphism(self.ring, tuple(
            (a + b) % g.r for g, a, b in
            zip(self.ring.summands, self.exponents, other.exponents)))


def frobenius_apply(aut: RingAutomorphism, a: RingElement) -> RingElement:
    """Teichmuller-digitwise Frobenius power."""
    if aut.ring != a.ring:
        raise RingMismatch("automorphism and element rings differ")
    out = []
    for g, e, cs in zip(a.ring.summands, aut.exponents, a.coeffs):
        if e == 0 or g.r == 1:
            out.append(cs)
            continue
        digits = [_ppow(t, g.p ** e, g.modulus, g.q)
                  for t in _teich_digits(cs, g)]
        acc = g.zero()
        pk = 1
        for t in digits:
            acc = _padd(acc, tuple(c * pk % g.q for c in t), g.q)
            pk *= g.p
        out.append(acc)
    return RingElement(a.ring, tuple(out))


def all_automorphisms(ring: RingSpec) -> list[RingAutomorphism]:
    """The group of per-summand lifted Frobenius maps (trivial for r = 1)."""
    combos = [()]
    for g in ring.summands:
        combos = [c + (e,) for c in combos for e in range(g.r)]
    return [RingAutomorphism(ring, c) for c in combos]


def units(ring: RingSpec):
    """All units, canonical order (desk-scale rings only)."""
    for a in ring.enumerate():
        if a.is_unit():
            yield a


@lru_cache(maxsize=None)
def primitive_element_coeffs(p: int, m: int, r: int, modulus: tuple) -> tuple:
    """Coefficients of a generator of the Teichmuller group T (order p^r - 1).

    For m = 1 this is a generator of the multiplicative group of GF(p^r);
    search is brute force, so residue fields are desk-scale by contract.
    """
    g = GaloisRingSpec(p, m, r, modulus)
    n = g.residue_order - 1
    prime_divs = sorted(factorize(n)) if n > 1 else []
    one = g.one()
    for idx in range(1, g.order):
        coeffs, v = [], idx
        for _ in range(g.r):
            coeffs.append(v % g.q)
            v //= g.q
        cs = _teich_lift(tuple(coeffs), g)
        if all(c == 0 for c in cs):
            continue
        if _ppow(cs, n, g.modulus, g.q) != one:
            continue
        if all(_ppow(cs, n // d, g.modulus, g.q) != one for d in prime_divs):
            return cs
    raise NonUnit("no primitive element found")
