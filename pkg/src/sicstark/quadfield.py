"""Exact arithmetic in real quadratic fields K = Q(sqrt(D)).

Elements are stored as p + q*sqrt(D) with rational p, q, where D is the
squarefree radical of (d+1)(d-3).  The two real embeddings send sqrt(D)
to +sqrt(D) (rho1) and -sqrt(D) (rho2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath as mp
from sympy import factorint, isprime, kronecker_symbol, primerange


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class QuadRational:
    p: Fraction
    q: Fraction
    D: int

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        object.__setattr__(self, "q", Fraction(self.q))

    def _coerce(self, other):
        if isinstance(other, QuadRational):
            if other.D != self.D:
                raise FieldError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadRational(Fraction(other), Fraction(0), self.D)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadRational(self.p + o.p, self.q + o.q, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadRational(-self.p, -self.q, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadRational(self.p * o.p + self.D * self.q * o.q,
                            self.p * o.q + self.q * o.p, self.D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in K")
        c = o.conj()
        return QuadRational((self * c).p / n, (self * c).q / n, self.D)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return (1 / self) ** (-k)
        out = QuadRational(1, 0, self.D)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.p == o.p and self.q == o.q

    def __hash__(self):
        return hash((self.p, self.q, self.D))

    def conj(self) -> "QuadRational":
        return QuadRational(self.p, -self.q, self.D)

    def norm(self) -> Fraction:
        return self.p * self.p - self.D * self.q * self.q

    def trace(self) -> Fraction:
        return 2 * self.p

    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    def is_integral(self) -> bool:
        """Membership in the maximal order."""
        if self.p.denominator == 1 and self.q.denominator == 1:
            return True
        if self.D % 4 != 1:
            return False
        return (2 * self.p).denominator == 1 and (2 * self.q).denominator == 1 \
            and (2 * self.p - 2 * self.q) % 2 == 0

    def sign(self, place: int = 1) -> int:
        """Exact sign of rho_place(x)."""
        q = self.q if place == 1 else -self.q
        sp = (self.p > 0) - (self.p < 0)
        sq = (q > 0) - (q < 0)
        if sq == 0 or sp == sq:
            return sp if sp else sq
        # opposite signs: compare p^2 with D q^2
        return sp if self.p * self.p > self.D * q * q else sq

    def embed(self, place: int = 1):
        """Value under rho_place at the current mpmath precision."""
        r = mp.sqrt(self.D)
        q = self.q if place == 1 else -self.q
        return mp.mpf(self.p.numerator) / self.p.denominator + \
            mp.mpf(q.numerator) / q.denominator * r

    def mod(self, d: int) -> tuple[int, int]:
        """Reduce an element integral at d to (p mod d, q mod d)."""
        den = self.p.denominator * self.q.denominator
        if den % d == 0:
            raise FieldError("element not integral at %d" % d)
        inv = pow(den, -1, d)
        return ((self.p * den).numerator * inv % d,
                (self.q * den).numerator * inv % d)

    def __repr__(self):
        return "QuadRational(%s + %s*sqrt(%d))" % (self.p, self.q, self.D)


def squarefree_part(n: int) -> tuple[int, int]:
    """Return (D, f) with n = f^2 * D and D squarefree."""
    D, f = 1, 1
    for p, e in factorint(n).items():
        f *= p ** (e // 2)
        if e % 2:
            D *= p
    return D, f


def _cf_fundamental_unit(D: int) -> QuadRational:
    """Fundamental unit of the maximal order of Q(sqrt(D)).

    Runs the PQa continued fraction of the order generator w and stops at
    the first convergent h/k with h - k*w a unit.
    """
    if D % 4 == 1:
        P, Q = 1, 2
        w = QuadRational(Fraction(1, 2), Fraction(1, 2), D)
    else:
        P, Q = 0, 1
        w = QuadRational(0, 1, D)
    s = math.isqrt(D)
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    for _ in range(10 * D + 100):
        a = _floor_quad(P, Q, D)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        u = h1 - k1 * w
        if abs(u.norm()) == 1:
            cands = [u, -u, 1 / u, -1 / u]
            best = [c for c in cands if c.sign(1) > 0 and c.embed(1) > 1]
            return min(best, key=lambda c: c.embed(1))
        P = a * Q - P
        Q = (D - P * P) // Q
    raise FieldError("continued fraction did not reach a unit")


def _floor_quad(P: int, Q: int, D: int) -> int:
    """floor((P + sqrt(D)) / Q) in exact integer arithmetic."""
    s = math.isqrt(D)
    a = (P + s) // Q
    # adjust: isqrt(D) < sqrt(D) < isqrt(D)+1 when D not square
    while (a + 1) * Q - P <= 0 or _lt_sqrt((a + 1) * Q - P, D):
        a += 1
    while a * Q - P > 0 and not _lt_sqrt(a * Q - P, D):
        a -= 1
    return a


def _lt_sqrt(x: int, D: int) -> bool:
    """x < sqrt(D) for integer x."""
    return x < 0 or x * x < D


def field_discriminant(D: int) -> int:
    return D if D % 4 == 1 else 4 * D


def _reduce_step(a: int, b: int, c: int, disc: int) -> tuple[int, int, int]:
    """rho(a, b, c) = (c, b', a') with b' = -b mod 2|c| and sqrt(disc) - 2|c| < b' < sqrt(disc)."""
    s = math.isqrt(disc)
    m = 2 * abs(c)
    bp = s - (s + b) % m
    return c, bp, (bp * bp - disc) // (4 * c)


def _is_reduced(a: int, b: int, disc: int) -> bool:
    t = 2 * abs(a)
    return 0 < b and b * b < disc and (t + b) ** 2 > disc and (t <= b or (t - b) ** 2 < disc)


def narrow_class_number(disc: int) -> int:
    """Number of rho-cycles of reduced indefinite forms of discriminant disc."""
    s = math.isqrt(disc)
    reduced = []
    for b in range(1, s + 1):
        if (b - disc) % 2:
            continue
        n = (disc - b * b) // 4
        for a in range(1, n + 1):
            if n % a == 0 and _is_reduced(a, b, disc):
                reduced += [(a, b, -n // a), (-a, b, n // a)]
    seen = set()
    cycles = 0
    for form in reduced:
        if form in seen:
            continue
        cycles += 1
        while form not in seen:
            seen.add(form)
            form = _reduce_step(*form, disc)
    return cycles


@dataclass(frozen=True)
class PrincipalIdeal:
    generator: QuadRational
    norm: int

    def __post_init__(self):
        if abs(self.generator.norm()) != self.norm:
            raise FieldError("norm mismatch for ideal generator")

    def same_as(self, other: "PrincipalIdeal") -> bool:
        if self.norm != other.norm:
            return False
        return (self.generator / other.generator).is_integral() and \
            (other.generator / self.generator).is_integral()


@dataclass(frozen=True)
class FieldContext:
    d: int
    Delta: int
    D: int
    f: int
    disc: int
    fundamental_unit: QuadRational
    zauner_unit: QuadRational
    zauner_power: int
    class_number: int
    narrow_class_number: int = field(default=1)

    def quad(self, p, q=0) -> QuadRational:
        return QuadRational(p, q, self.D)

    def sqrt_delta(self):
        """rho1(sqrt(Delta)) at the current mpmath precision."""
        return self.f * mp.sqrt(self.D)

    def reduce_mod_d(self, x: QuadRational) -> tuple[int, int]:
        """Residue of x as (m, n) meaning m + n*sqrt(Delta) mod d."""
        a, b = x.mod(self.d)
        return a, b * pow(self.f, -1, self.d) % self.d

    def from_mn(self, m: int, n: int) -> QuadRational:
        return QuadRational(m, n * self.f, self.D)

    @cached_property
    def unit_norm(self) -> int:
        return int(self.fundamental_unit.norm())

    def is_one_mod_d(self, x: QuadRational) -> bool:
        return ((x - 1) / self.d).is_integral()

    def sqrt_D(self):
        return mp.sqrt(self.D)


def make_field(d: int, relaxed: bool = False) -> FieldContext:
    """Field data for the Zauner family in dimension d.

    With relaxed=True the primality and d = 2 mod 3 checks are skipped; only
    used to exercise the unit relations at composite d such as 15.
    """
    if d < 5:
        raise FieldError("dimension must be at least 5")
    if not relaxed:
        if not isprime(d):
            raise FieldError("d=%d is not prime" % d)
        if d % 3 != 2:
            raise FieldError("d=%d is not 2 mod 3" % d)
    Delta = (d + 1) * (d - 3)
    D, f = squarefree_part(Delta)
    assert D > 1, "Delta is a perfect square"
    eps0 = _cf_fundamental_unit(D)
    eps = QuadRational(Fraction(d - 1, 2), Fraction(f, 2), D)
    if not eps.is_integral() or eps.norm() != 1:
        raise FieldError("Zauner element is not a unit")
    k, x = 1, eps0
    while x != eps:
        x = x * eps0
        k += 1
        if k > 64:
            raise FieldError("Zauner unit is not a positive power of eps0")
    disc = field_discriminant(D)
    hplus = narrow_class_number(disc)
    h = hplus if eps0.norm() == -1 else hplus // 2
    ctx = FieldContext(d=d, Delta=Delta, D=D, f=f, disc=disc, fundamental_unit=eps0,
                       zauner_unit=eps, zauner_power=k, class_number=h,
                       narrow_class_number=hplus)
    if not relaxed and not ctx.is_one_mod_d(eps ** 3):
        raise FieldError("eps^3 is not 1 mod d")
    return ctx


def minimal_congruent_unit(ctx: FieldContext) -> QuadRational:
    """Smallest unit eta > 1 with eta = 1 mod d; must equal eps^3."""
    bound = 3 * ctx.zauner_power
    x = QuadRational(1, 0, ctx.D)
    for _ in range(bound):
        x = x * ctx.fundamental_unit
        if ctx.is_one_mod_d(x):
            if x != ctx.zauner_unit ** 3:
                raise FieldError("minimal congruent unit differs from eps^3")
            return x
    raise FieldError("no unit = 1 mod d among eps0^j, j <= %d" % bound)


# --- ideals ---------------------------------------------------------------

def _element_of_norm(ctx: FieldContext, n: int, avoid: list[QuadRational] = ()) -> QuadRational | None:
    """Search an integral element of norm +-n whose ideal differs from those in avoid."""
    D = ctx.D
    half = D % 4 == 1
    # every principal ideal has a generator with |rho_i| <= sqrt(n) * eps0
    e0 = float(ctx.fundamental_unit.embed(1))
    ymax = int(math.sqrt(n) * e0 / math.sqrt(D)) + 2
    scale = 2 if half else 1
    target = n * scale * scale
    for y in range(0, scale * ymax + 1):
        for sgn in (1, -1):
            x2 = D * y * y + sgn * target
            if x2 < 0:
                continue
            x = math.isqrt(x2)
            if x * x != x2:
                continue
            if half and (x - y) % 2:
                continue
            g = QuadRational(Fraction(x, scale), Fraction(y, scale), D)
            for cand in (g, g.conj()):
                I = PrincipalIdeal(cand, n)
                if not any(I.same_as(PrincipalIdeal(a, n)) for a in avoid):
                    return cand
    return None


def enumerate_prime_ideals(ctx: FieldContext, X: int) -> list[PrincipalIdeal]:
    """Every prime ideal of norm <= X, once each (class number one only)."""
    if ctx.class_number != 1:
        raise FieldError("ideal enumeration needs class number 1")
    out = []
    for p in primerange(2, X + 1):
        chi = kronecker_symbol(ctx.disc, p)
        if chi == -1:
            if p * p <= X:
                out.append(PrincipalIdeal(QuadRational(p, 0, ctx.D), p * p))
            continue
        g = _element_of_norm(ctx, p)
        if g is None:
            raise FieldError("no generator of norm %d" % p)
        out.append(PrincipalIdeal(g, p))
        if chi == 1:
            g2 = _element_of_norm(ctx, p, avoid=[g])
            if g2 is None:
                raise FieldError("second prime over %d not found" % p)
            out.append(PrincipalIdeal(g2, p))
    return out


def enumerate_ideals(ctx: FieldContext, X: int) -> dict[int, list[PrincipalIdeal]]:
    """All integral ideals of norm <= X, keyed by norm."""
    primes = enumerate_prime_ideals(ctx, X)
    out: dict[int, list[PrincipalIdeal]] = {1: [PrincipalIdeal(QuadRational(1, 0, ctx.D), 1)]}

    def walk(start, norm, gen):
        for i in range(start, len(primes)):
            P = primes[i]
            nn = norm * P.norm
            if nn > X:
                continue
            g = gen * P.generator
            out.setdefault(nn, []).append(PrincipalIdeal(g, nn))
            walk(i, nn, g)

    walk(0, 1, QuadRational(1, 0, ctx.D))
    return dict(sorted(out.items()))
