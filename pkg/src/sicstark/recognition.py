"""Turning high-precision Stark units into exact polynomials over K.

Notation used throughout: alpha_k is the Stark unit of the class with exponent
k, theta_k = s_k * sqrt((d+1) alpha_k) with a sign s_k, and nu_k = theta_k/(d+1)
is the overlap.  Polynomials in theta have integral coefficients and their
conjugates have roots of modulus sqrt(d+1), which gives every coefficient a
conjugate-side height bound used by the lattice reduction.

    f_d(x) = prod (x - alpha_k)
    F(x)   = prod (x - theta_k)
    g_d(x) = (d+1)^(N/2) prod (x - nu_k)
    h_d    maps nu_k to nu_{k+1}
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

import flint
import mpmath as mp

from .quadfield import FieldContext, QuadRational
from .roots import poly_roots


class RecognitionError(RuntimeError):
    pass


class PrecisionError(RecognitionError):
    pass


# --- single numbers --------------------------------------------------------

@dataclass(frozen=True)
class RecognizedQuad:
    p: Fraction
    q: Fraction
    residual: mp.mpf
    ok: bool
    relation: tuple[int, int, int] | None = None
    precondition_met: bool = True

    def value(self, D: int) -> QuadRational:
        return QuadRational(self.p, self.q, D)


def _omega(D: int, conj: bool = False):
    s = -mp.sqrt(D) if conj else mp.sqrt(D)
    return (1 + s) / 2 if D % 4 == 1 else s


def recognize_quad(x, D: int, P: int, conj_bound=None, den_bound: int | None = None,
                   height_bound=None) -> RecognizedQuad:
    """Find x = (a + b*w)/c with w the order generator of Q(sqrt(D)).

    The lattice holds (1, w, x) scaled by 10^(P-10); with conj_bound B a fifth
    column penalises |a + b*w'| > c*B.  Relations with an entry above the height
    bound are rejected, so random inputs come back with ok=False.
    """
    x = mp.mpf(x)
    B = None if conj_bound is None else mp.mpf(conj_bound)
    if height_bound is None:
        side = abs(x) + (B if B is not None else abs(x))
        height_bound = (side + 1) * (den_bound or 1) * 2
    H = mp.mpf(height_bound)
    pre = P > 2 * mp.log10(max(H, 1)) + 20
    extra = int(mp.log10(max(H, 1))) + 20
    with mp.workdps(P + extra):
        w, wc = _omega(D), _omega(D, conj=True)
        tol = mp.mpf(10) ** (10 - P) * max(1, abs(x))
        S = H / tol
        if B is None:
            rows = [[1, 0, 0, int(mp.nint(S))],
                    [0, 1, 0, int(mp.nint(S * w))],
                    [0, 0, 1, int(mp.nint(-S * x))]]
        else:
            T = H / B
            rows = [[1, 0, 0, int(mp.nint(S)), int(mp.nint(T))],
                    [0, 1, 0, int(mp.nint(S * w)), int(mp.nint(T * wc))],
                    [0, 0, 1, int(mp.nint(-S * x)), 0]]
        red = flint.fmpz_mat(rows).lll()
        for i in range(red.nrows()):
            a, b, c = (int(red[i, j]) for j in range(3))
            if c == 0:
                continue
            if c < 0:
                a, b, c = -a, -b, -c
            val = (a + b * w) / c
            res = abs(x - val)
            # below two heights of digits a short vector need not be the true relation
            ok = pre and res <= tol and max(abs(a), abs(b), c) <= H
            if den_bound is not None:
                ok = ok and c <= den_bound
            if B is not None:
                ok = ok and abs(a + b * wc) <= c * B * (1 + mp.mpf(10) ** -9)
            if D % 4 == 1:
                p, q = Fraction(2 * a + b, 2 * c), Fraction(b, 2 * c)
            else:
                p, q = Fraction(a, c), Fraction(b, c)
            return RecognizedQuad(p, q, res, bool(ok), (a, b, c), bool(pre))
    return RecognizedQuad(Fraction(0), Fraction(0), mp.inf, False, None, bool(pre))


# --- polynomials -----------------------------------------------------------

@dataclass
class RecognizedPolynomial:
    role: str
    d: int
    D: int
    coeffs: list[QuadRational]  # ascending powers
    residual: mp.mpf = field(default_factory=lambda: mp.mpf(0))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def conjugate(self, role: str | None = None) -> "RecognizedPolynomial":
        return RecognizedPolynomial(role or self.role + "~", self.d, self.D,
                                    [c.conj() for c in self.coeffs], self.residual)

    def numeric(self, place: int = 1) -> list:
        return [c.embed(place) for c in self.coeffs]

    def __call__(self, z, place: int = 1):
        return mp.polyval(self.numeric(place)[::-1], z)

    def exact_at(self, x: QuadRational | int) -> QuadRational:
        acc = QuadRational(0, 0, self.D)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def same_coefficients(self, other: "RecognizedPolynomial") -> bool:
        return self.D == other.D and self.coeffs == other.coeffs

    def to_text(self) -> str:
        lines = ["# role=%s d=%d degree=%d D=%d order=ascending" % (self.role, self.d, self.degree, self.D)]
        for c in self.coeffs:
            r = math.lcm(c.p.denominator, c.q.denominator)
            lines.append("%d/%d + %d/%d * sqrt(%d)" % (c.p * r, r, c.q * r, r, self.D))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RecognizedPolynomial":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        head = dict(kv.split("=", 1) for kv in lines[0].lstrip("#").split())
        D = int(head["D"])
        pat = re.compile(r"(-?\d+)/(\d+)\s*\+\s*(-?\d+)/(\d+)\s*\*\s*sqrt\((\d+)\)")
        coeffs = []
        for ln in lines[1:]:
            m = pat.fullmatch(ln)
            if not m or int(m.group(5)) != D:
                raise RecognitionError("bad coefficient line: %r" % ln)
            coeffs.append(QuadRational(Fraction(int(m.group(1)), int(m.group(2))),
                                       Fraction(int(m.group(3)), int(m.group(4))), D))
        if len(coeffs) != int(head["degree"]) + 1:
            raise RecognitionError("degree mismatch")
        if head.get("order", "ascending") == "descending":
            coeffs.reverse()
        return cls(head["role"], int(head["d"]), D, coeffs)


def expand_roots(roots: Sequence) -> list:
    """Ascending coefficients of prod (x - r), multiplied in the given order."""
    poly = [mp.mpf(1)]
    for r in roots:
        nxt = [mp.mpf(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] += c
            nxt[i] -= r * c
        poly = nxt
    return poly


def _recognize_coeffs(values: Sequence, D: int, P: int, bounds: Sequence, den_bound: int = 1,
                      stop_early: bool = False) -> tuple[list, list[int], mp.mpf]:
    out, bad, worst = [], [], mp.mpf(0)
    for j, (v, B) in enumerate(zip(values, bounds)):
        r = recognize_quad(v, D, P, conj_bound=B, den_bound=den_bound)
        if not r.ok:
            bad.append(j)
            out.append(None)
            if stop_early:
                return out, bad, worst
            continue
        worst = max(worst, r.residual)
        out.append(r.value(D))
    return out, bad, worst


def height_digits(alpha: Sequence, d: int) -> int:
    """log10 of the largest coefficient height met in recognising F and h."""
    N = len(alpha)
    r = math.sqrt(d + 1)
    absth = sorted((math.sqrt((d + 1) * float(a)) for a in alpha), reverse=True)
    logs = []
    for j in range(N + 1):
        conj = math.lgamma(N + 1) - math.lgamma(j + 1) - math.lgamma(N - j + 1) + (N - j) * math.log(r)
        real = sum(math.log(t) for t in absth[:N - j]) + conj - (N - j) * math.log(r)
        logs.append(max(conj, real))
    for j in range(N):
        logs.append(math.log(N * r) + math.lgamma(N) - math.lgamma(j + 1) - math.lgamma(N - j)
                    + (N - 1 - j) * math.log(r))
    return int(max(logs) / math.log(10)) + 1


def recognition_precision(alpha: Sequence, d: int) -> int:
    """Working digits for the recognition stages, from a priori height bounds.

    Three heights' worth of digits covers the lattice (two) plus the loss in
    the Vandermonde solve for h_d (one); 40 digits are margin.
    """
    return 3 * height_digits(alpha, d) + 40


def build_f(alpha: Sequence, ctx: FieldContext, P: int) -> RecognizedPolynomial:
    """f_d = prod_k (x - alpha_k) over O_K; conjugate roots lie on the unit circle."""
    N = len(alpha)
    with mp.workdps(P + 10):
        vals = expand_roots(alpha)
        coeffs, bad, worst = _recognize_coeffs(vals, ctx.D, P, [mp.binomial(N, j) for j in range(N + 1)])
    if bad:
        raise PrecisionError("f_%d: coefficients %s not recognised at P=%d; try P=%d"
                             % (ctx.d, bad, P, recognition_precision(alpha, ctx.d)))
    f = RecognizedPolynomial("f", ctx.d, ctx.D, coeffs, worst)
    check_f(f, ctx)
    return f


def check_f(f: RecognizedPolynomial, ctx: FieldContext) -> None:
    c = f.coeffs
    if c[-1] != 1 or c[0] != 1:
        raise RecognitionError("f is not monic with constant term 1")
    if any(c[j] != c[f.degree - j] for j in range(f.degree + 1)):
        raise RecognitionError("f is not palindromic")
    if not (f.exact_at(1) / ctx.d).is_integral():
        raise RecognitionError("f(1) is not in d*O_K")


# --- signs ------------------------------------------------------------------

@dataclass
class SignAssignment:
    signs: list[int]
    strategy: str
    flipped_by_convention: bool = False
    admissible: int = 1
    convention_ok: bool = True
    F: list[QuadRational] | None = None
    note: str = ""

    @property
    def identity_sign(self) -> int:
        return self.signs[0]


def thetas(alpha: Sequence, signs: Sequence[int], d: int) -> list:
    return [s * mp.sqrt((d + 1) * a) for s, a in zip(signs, alpha)]


def _theta_bounds(N: int, d: int) -> list:
    r = mp.sqrt(d + 1)
    return [mp.binomial(N, j) * r ** (N - j) for j in range(N + 1)]


def recognize_theta_poly(theta: Sequence, ctx: FieldContext, P: int, stop_early: bool = False):
    """Integral coefficients of prod (x - theta_k), or (None, bad) on failure."""
    with mp.workdps(P + 10):
        vals = expand_roots(theta)
        coeffs, bad, _ = _recognize_coeffs(vals, ctx.D, P, _theta_bounds(len(theta), ctx.d),
                                           stop_early=stop_early)
    return (None if bad else coeffs), bad


def _in_dOK(x: QuadRational, d: int) -> bool:
    return (x / d).is_integral()


def global_sign_rule(F: list[QuadRational], d: int) -> int:
    """+1 if F(1) is in d*O_K, -1 if F(-1) is; nu = 1 mod the prime over d forces one."""
    at1 = sum(F, QuadRational(0, 0, F[0].D))
    atm1 = sum((c if j % 2 == 0 else -c for j, c in enumerate(F)), QuadRational(0, 0, F[0].D))
    if _in_dOK(at1, d):
        return 1
    if _in_dOK(atm1, d):
        return -1
    raise RecognitionError("neither F(1) nor F(-1) lies in d*O_K")


def _flip(F: list[QuadRational]) -> list[QuadRational]:
    N = len(F) - 1
    return [c if (N - j) % 2 == 0 else -c for j, c in enumerate(F)]


def _apply_convention(sa: SignAssignment, d: int) -> SignAssignment:
    if global_sign_rule(sa.F, d) == -1:
        sa.signs = [-s for s in sa.signs]
        sa.F = _flip(sa.F)
        sa.flipped_by_convention = True
    return sa


def _signs_bruteforce(alpha, ctx, G, P, m_test: Callable | None) -> SignAssignment:
    N = len(alpha)
    found = []
    for tail in product((1, -1), repeat=N - 1):
        signs = [1, *tail]
        F, _ = recognize_theta_poly(thetas(alpha, signs, ctx.d), ctx, P, stop_early=True)
        if F is None:
            continue
        if m_test is not None and not m_test(signs):
            continue
        found.append((signs, F))
    if len(found) != 1:
        raise RecognitionError("brute force found %d admissible sign vectors" % len(found))
    return SignAssignment(found[0][0], "bruteforce", F=found[0][1], admissible=1)


def _signs_known_g(alpha, ctx, P, g: RecognizedPolynomial) -> SignAssignment:
    N = len(alpha)
    if g.degree != N:
        raise RecognitionError("g has degree %d, expected %d" % (g.degree, N))
    roots, _ = poly_roots(g.coeffs, P)
    with mp.workdps(P):
        real = [z.real for z in roots]
        if max(abs(z.imag) for z in roots) > mp.mpf(10) ** (10 - P):
            raise RecognitionError("g has non-real roots")
        signs, used = [], set()
        for a in alpha:
            i = min(range(N), key=lambda i: abs((ctx.d + 1) * real[i] ** 2 - a))
            if i in used or abs((ctx.d + 1) * real[i] ** 2 - a) > mp.mpf(10) ** (10 - P) * max(1, a):
                raise RecognitionError("root matching is not injective")
            used.add(i)
            signs.append(1 if real[i] > 0 else -1)
    F, bad = recognize_theta_poly(thetas(alpha, signs, ctx.d), ctx, P)
    if F is None:
        raise PrecisionError("theta polynomial not recognised at coefficients %s" % bad[:5])
    sa = SignAssignment(signs, "known_g", F=F)
    sa.convention_ok = global_sign_rule(F, ctx.d) == 1
    return sa


def _signs_search(alpha, ctx, G, P) -> SignAssignment:
    """Lattice knapsack on the trace of theta.

    Pairs (A, RA) share a sign, so Tr(theta) = sum_i s_i w_i with
    w_i = |theta_A| + |theta_RA|.  Tr(theta) = p + q sqrt(D) with
    |p - q sqrt(D)| <= N sqrt(d+1); the sign vector is a short lattice vector.
    """
    N = len(alpha)
    h = G.R_index
    if 2 * h != N:
        raise RecognitionError("R must have exponent N/2")
    scale = 10 ** 6
    with mp.workdps(P + 20):
        mag = [mp.sqrt((ctx.d + 1) * a) for a in alpha]
        wts = [mag[k] + mag[k + h] for k in range(h)]
        Bc = N * mp.sqrt(ctx.d + 1)
        S = mp.mpf(10) ** (P - 20)
        w = mp.sqrt(ctx.D)
        n = h
        rows = []
        for i in range(n):
            r = [0] * (n + 1)
            r[i] = 2 * scale
            rows.append(r + [int(mp.nint(-S * 2 * wts[i])), 0])
        rows.append([0] * (n + 1) + [int(mp.nint(-S)), int(mp.nint(scale / Bc))])
        rows.append([0] * (n + 1) + [int(mp.nint(-S * w)), int(mp.nint(-scale * w / Bc))])
        rows.append([-scale] * n + [scale, int(mp.nint(S * mp.fsum(wts))), 0])
    red = flint.fmpz_mat(rows).lll()
    for i in range(red.nrows()):
        v = [int(red[i, j]) for j in range(n + 3)]
        if abs(v[n]) != scale or any(abs(x) != scale for x in v[:n]) or abs(v[n + 1]) > 4 * n:
            continue
        half = [-(x // scale) * (v[n] // scale) for x in v[:n]]
        signs = half + half
        F, bad = recognize_theta_poly(thetas(alpha, signs, ctx.d), ctx, P)
        if F is None:
            continue
        return SignAssignment(signs, "search", F=F,
                              note="knapsack on Tr(theta) with conjugate bound")
    raise RecognitionError("sign search found no admissible vector")


def resolve_signs(alpha: Sequence, ctx: FieldContext, G, P: int, strategy: str = "search",
                  g: RecognizedPolynomial | None = None, m_test: Callable | None = None):
    """Signs s_k and overlaps nu_k = s_k sqrt(alpha_k/(d+1)), indexed by exponent."""
    with mp.workdps(P + 10):
        return _resolve_signs(alpha, ctx, G, P, strategy, g, m_test)


def _resolve_signs(alpha, ctx, G, P, strategy, g, m_test):
    if strategy == "bruteforce":
        sa = _apply_convention(_signs_bruteforce(alpha, ctx, G, P, m_test), ctx.d)
    elif strategy == "known_g":
        if g is None:
            raise RecognitionError("known_g needs a g polynomial")
        sa = _signs_known_g(alpha, ctx, P, g)
    elif strategy == "search":
        sa = _apply_convention(_signs_search(alpha, ctx, G, P), ctx.d)
    else:
        raise RecognitionError("unknown sign strategy %r" % strategy)
    nus = [s * mp.sqrt(a / (ctx.d + 1)) for s, a in zip(sa.signs, alpha)]
    return sa, nus


def build_g(nus: Sequence, ctx: FieldContext, P: int, F: list[QuadRational] | None = None) -> RecognizedPolynomial:
    """g_d = (d+1)^(N/2) prod (x - nu_k), with coefficients in O_K."""
    N = len(nus)
    d = ctx.d
    if F is None:
        with mp.workdps(P + 10):
            theta = [(d + 1) * v for v in nus]
        F, bad = recognize_theta_poly(theta, ctx, P)
        if F is None:
            raise PrecisionError("g_%d: coefficients %s not recognised at P=%d" % (d, bad[:5], P))
    coeffs = [F[j] * Fraction(d + 1) ** (j - N // 2) for j in range(N + 1)]
    if not all(c.is_integral() for c in coeffs):
        raise RecognitionError("g has non-integral coefficients")
    return RecognizedPolynomial("g", d, ctx.D, coeffs)


def conjugate_poly(poly: RecognizedPolynomial) -> RecognizedPolynomial:
    return poly.conjugate(poly.role + "~")


def theta_poly(g: RecognizedPolynomial) -> list[QuadRational]:
    """F(x) = prod (x - theta) recovered from g."""
    N = g.degree
    return [c * Fraction(g.d + 1) ** (N // 2 - j) for j, c in enumerate(g.coeffs)]


# --- the Galois polynomial h -------------------------------------------------

@dataclass
class GaloisPolynomial:
    h: RecognizedPolynomial          # nu_k -> nu_{k+1}, coefficients in K
    b: list[QuadRational]            # theta_{k+1} = b(theta_k) / F'(theta_k)
    F: list[QuadRational]
    vandermonde_residual: mp.mpf
    orbit_residual: mp.mpf

    def conj_step(self, z):
        """One step of h~ on a root z of g~ (evaluated in the theta form)."""
        d = self.h.d
        t = (d + 1) * z
        b = [c.embed(2) for c in self.b]
        dF = [j * c.embed(2) for j, c in enumerate(self.F)][1:]
        return mp.polyval(b[::-1], t) / mp.polyval(dF[::-1], t) / (d + 1)


def _polymod_K(a: list[QuadRational], F: list[QuadRational]) -> list[QuadRational]:
    """a mod F for monic F (ascending lists)."""
    a = list(a)
    N = len(F) - 1
    for i in range(len(a) - 1, N - 1, -1):
        c = a[i]
        if c.is_zero():
            continue
        for j in range(N + 1):
            a[i - N + j] = a[i - N + j] - c * F[j]
    return a[:N] + [QuadRational(0, 0, F[0].D)] * max(0, N - len(a))


def _solve_mult_mod(F: list[QuadRational], mult: list[QuadRational], rhs: list[QuadRational]) -> list[QuadRational]:
    """Solve mult * H = rhs in K[x]/(F) as a 2N x 2N rational system."""
    N = len(F) - 1
    D = F[0].D
    zero = QuadRational(0, 0, D)
    cols = []
    for i in range(N):
        shifted = [zero] * i + list(mult)
        cols.append(_polymod_K(shifted, F))
    U = [[cols[i][r].p for i in range(N)] for r in range(N)]
    V = [[cols[i][r].q for i in range(N)] for r in range(N)]
    big = []
    for r in range(N):
        big.append([U[r][i] for i in range(N)] + [D * V[r][i] for i in range(N)])
    for r in range(N):
        big.append([V[r][i] for i in range(N)] + [U[r][i] for i in range(N)])
    fq = lambda x: flint.fmpq(x.numerator, x.denominator)
    A = flint.fmpq_mat(2 * N, 2 * N, [fq(x) for row in big for x in row])
    b = flint.fmpq_mat(2 * N, 1, [fq(c.p) for c in rhs] + [fq(c.q) for c in rhs])
    sol = A.solve(b)
    vals = [Fraction(int(sol[i, 0].p), int(sol[i, 0].q)) for i in range(2 * N)]
    return [QuadRational(vals[i], vals[N + i], D) for i in range(N)]


def solve_h(nus: Sequence, F: list[QuadRational], ctx: FieldContext, P: int) -> GaloisPolynomial:
    """h with h(nu_k) = nu_{k+1}, exponents ordered by the Galois generator.

    Numerically b = V^-1 y with V_kj = theta_k^j and y_k = F'(theta_k) theta_{k+1};
    b has integral coefficients with conjugate-side bounds.  Exactly,
    H = b / F' mod F, and h_j = H_j (d+1)^(j-1).
    """
    N = len(nus)
    d = ctx.d
    r = mp.sqrt(d + 1)
    with mp.workdps(P + 10):
        theta = [(d + 1) * v for v in nus]
        dF = [j * c.embed(1) for j, c in enumerate(F)][1:]
        V = mp.matrix([[t ** j for j in range(N)] for t in theta])
        y = mp.matrix([mp.polyval(dF[::-1], theta[k]) * theta[(k + 1) % N] for k in range(N)])
        bnum = mp.lu_solve(V, y)
        vres = mp.norm(V * bnum - y) / mp.norm(y)
        bounds = [N * r * mp.binomial(N - 1, j) * r ** (N - 1 - j) for j in range(N)]
        # the Vandermonde solve costs about one coefficient height of digits
        hd = height_digits([v * v * (d + 1) for v in nus], d)
        b, bad, _ = _recognize_coeffs([bnum[j] for j in range(N)], ctx.D, P - hd, bounds)
    if bad:
        raise PrecisionError("h_%d: %d of %d coefficients not recognised at P=%d; Vandermonde residual %s"
                             % (d, len(bad), N, P, mp.nstr(vres, 3)))
    dFx = [F[j] * j for j in range(1, N + 1)]
    H = _solve_mult_mod(F, dFx, b)
    coeffs = [H[j] * Fraction(d + 1) ** (j - 1) for j in range(N)]
    h = RecognizedPolynomial("h", d, ctx.D, coeffs)
    with mp.workdps(P + 10):
        hn = h.numeric(1)
        orbit = max(abs(mp.polyval(hn[::-1], nus[k]) - nus[(k + 1) % N]) for k in range(N))
    if orbit > mp.mpf(10) ** (15 - P + hd):
        raise RecognitionError("h does not map the orbit (residual %s)" % mp.nstr(orbit, 3))
    return GaloisPolynomial(h, b, F, vres, orbit)
