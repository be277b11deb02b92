"""The ray class group of modulus d*inf2 for K = Q(sqrt((d+1)(d-3))).

With class number one every ideal coprime to d is principal, so the group is

    ((O_K / d)^x  x  {+1, -1 at rho2})  /  image of <-1, eps0>.

Residues are written m + n*sqrt(Delta) mod d.  Classes are stored as
exponents of a fixed generator; the generator is the lexicographically
smallest (m, n) with positive sign whose class has full order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import mpmath as mp
import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form

from .quadfield import FieldContext, FieldError, QuadRational, _element_of_norm

Pair = tuple[int, int]
Elem = tuple[Pair, int]


class GroupError(RuntimeError):
    pass


def _mul(x: Pair, y: Pair, Delta: int, d: int) -> Pair:
    return ((x[0] * y[0] + Delta * x[1] * y[1]) % d, (x[0] * y[1] + x[1] * y[0]) % d)


@dataclass
class Character:
    N: int
    j: int
    R_index: int

    def exponent(self, k: int) -> int:
        """chi(gamma^k) = e(exponent / N)."""
        return self.j * k % self.N

    def value(self, k: int):
        return mp.expjpi(mp.mpf(2 * self.exponent(k)) / self.N)

    @property
    def at_R(self) -> int:
        return -1 if (self.j * self.R_index * 2 // self.N) % 2 else 1

    @property
    def conj(self) -> "Character":
        return Character(self.N, (-self.j) % self.N, self.R_index)


@dataclass
class RayClassGroup:
    ctx: FieldContext
    N: int
    generator: Elem
    dlog: dict[Elem, int]
    R_index: int
    amn_index: dict[Pair, int]
    structure: tuple[int, ...]
    unit_image: frozenset = field(default_factory=frozenset)

    @property
    def d(self) -> int:
        return self.ctx.d

    def mul(self, x: Pair, y: Pair) -> Pair:
        return _mul(x, y, self.ctx.Delta, self.ctx.d)

    def class_of_element(self, beta: QuadRational) -> int:
        if math.gcd(int(beta.norm().numerator), self.d) != 1 or beta.norm().denominator % self.d == 0:
            raise GroupError("element not coprime to d")
        return self.dlog[(self.ctx.reduce_mod_d(beta), beta.sign(2))]

    def amn_class(self, m: int, n: int) -> int:
        key = (m % self.d, n % self.d)
        if key == (0, 0):
            raise GroupError("(m, n) = (0, 0) has no class")
        return self.amn_index[key]

    def R_class(self) -> int:
        return self.R_index

    def fiber(self, m: int, n: int) -> list[Pair]:
        """The eps-orbit of (m, n): all pairs sharing its class."""
        e = self.ctx.reduce_mod_d(self.ctx.zauner_unit)
        out, x = [], (m % self.d, n % self.d)
        while x not in out:
            out.append(x)
            x = self.mul(x, e)
        return sorted(out)

    def fiber_rep(self, m: int, n: int) -> Pair:
        return self.fiber(m, n)[0]

    def class_reps(self) -> list[Pair]:
        """Lexicographically smallest (m, n) in each class, indexed by exponent."""
        reps: list[Pair | None] = [None] * self.N
        for mn in sorted(self.amn_index):
            k = self.amn_index[mn]
            if reps[k] is None:
                reps[k] = mn
        return reps  # type: ignore[return-value]

    def galois_permutation(self) -> tuple[list[int], dict[Pair, Pair]]:
        """Action of the generator: k -> k+1 on exponents, fibers -> fibers on pairs."""
        g = self.generator[0]
        on_k = [(k + 1) % self.N for k in range(self.N)]
        on_mn = {mn: self.fiber_rep(*self.mul(mn, g)) for mn in self.amn_index}
        return on_k, on_mn

    def characters(self) -> list[Character]:
        return [Character(self.N, j, self.R_index) for j in range(self.N)]

    def odd_characters(self) -> list[Character]:
        return [c for c in self.characters() if c.at_R == -1]

    def class_table(self) -> np.ndarray:
        """table[m, n, s] = exponent, s = 0 for rho2 > 0 and 1 for rho2 < 0."""
        d = self.d
        t = np.full((d, d, 2), -1, dtype=np.int64)
        for ((m, n), s), k in self.dlog.items():
            t[m, n, 0 if s > 0 else 1] = k
        return t

    def dump_jsonl(self, fh: IO[str]) -> None:
        for (m, n) in sorted(self.amn_index):
            fh.write(json.dumps({"d": self.d, "m": m, "n": n, "class": self.amn_index[(m, n)],
                                 "fiber_rep": list(self.fiber_rep(m, n))}) + "\n")


def _principal_part(ctx: FieldContext):
    d, Delta = ctx.d, ctx.Delta
    elems: list[Elem] = [((m, n), s) for m in range(d) for n in range(d)
                         if (m, n) != (0, 0) for s in (1, -1)]
    one: Elem = ((1, 0), 1)

    def gmul(x: Elem, y: Elem) -> Elem:
        return (_mul(x[0], y[0], Delta, d), x[1] * y[1])

    eps0 = ctx.fundamental_unit
    units = [((d - 1, 0), -1), (ctx.reduce_mod_d(eps0), eps0.sign(2))]
    H = {one}
    while True:
        grown = H | {gmul(h, u) for h in H for u in units}
        if grown == H:
            break
        H = grown
    coset: dict[Elem, int] = {}
    n_cosets = 0
    for e in elems:
        if e in coset:
            continue
        for h in H:
            coset[gmul(e, h)] = n_cosets
        n_cosets += 1
    return elems, H, coset, n_cosets, gmul, one


def build_ray_class_group(ctx: FieldContext) -> RayClassGroup:
    """Cyclic group, generator, discrete logs and the (m, n) table.

    For class number two (d = 23) the returned object describes the principal
    part only; its ``structure`` field holds the invariants of the full group.
    """
    elems, H, coset, N, gmul, one = _principal_part(ctx)
    d = ctx.d
    if 2 * (d * d - 1) != N * len(H):
        raise GroupError("coset count inconsistent")

    def order(e: Elem) -> int:
        x, k = e, 1
        while coset[x] != coset[one]:
            x = gmul(x, e)
            k += 1
        return k

    gen = next((e for e in sorted(elems) if e[1] == 1 and order(e) == N), None)
    if gen is None:
        raise GroupError("principal ray class group is not cyclic")
    by_coset: dict[int, int] = {}
    x = one
    for k in range(N):
        by_coset[coset[x]] = k
        x = gmul(x, gen)
    dlog = {e: by_coset[coset[e]] for e in elems}
    R_index = dlog[((d - 1, 0), 1)]
    if R_index == 0 or (2 * R_index) % N:
        raise GroupError("class R is not of order 2")
    amn = {mn: dlog[(mn, 1)] for (mn, s) in elems if s == 1}
    structure: tuple[int, ...] = (N,)
    if ctx.class_number != 1:
        structure = _full_structure(ctx, dlog, N)
    return RayClassGroup(ctx=ctx, N=N, generator=gen, dlog=dlog, R_index=R_index,
                         amn_index=amn, structure=structure, unit_image=frozenset(H))


def _full_structure(ctx: FieldContext, dlog: dict[Elem, int], N0: int) -> tuple[int, ...]:
    """Invariants of the full ray class group when the class group has order 2.

    A non-principal prime a with a^2 = (alpha) gives the relation
    2*[a] = dlog(alpha) * gamma; the Smith form of [[N0, 0], [-t, 2]] gives the group.
    """
    if ctx.class_number != 2:
        raise GroupError("only class number 1 or 2 is supported")
    from sympy import primerange, kronecker_symbol
    for p in primerange(2, 1000):
        if p == ctx.d or kronecker_symbol(ctx.disc, p) == -1:
            continue
        if _element_of_norm(ctx, p) is not None:
            continue
        alpha = _element_of_norm(ctx, p * p, avoid=[QuadRational(p, 0, ctx.D)])
        if alpha is None:
            alpha = QuadRational(p, 0, ctx.D)
        t = dlog[(ctx.reduce_mod_d(alpha), alpha.sign(2))]
        snf = smith_normal_form(Matrix([[N0, 0], [-t, 2]]))
        inv = sorted(abs(int(snf[i, i])) for i in range(2))
        return tuple(x for x in inv if x != 1)
    raise FieldError("no non-principal prime below 1000")
