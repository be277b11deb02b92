"""Certified complex root isolation through Arb ball arithmetic (python-flint).

Coefficients arrive either as mpmath numbers or as exact elements of a real
quadratic field; results come back as mpmath complex numbers together with
the largest ball radius, which is the certified error bound.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import flint
import mpmath as mp

from .quadfield import QuadRational


class RootError(RuntimeError):
    pass


def _arb_rational(x: Fraction) -> flint.arb:
    return flint.arb(flint.fmpq(x.numerator, x.denominator))


def _arb_quad(x: QuadRational, conj: bool) -> flint.arb:
    q = -x.q if conj else x.q
    return _arb_rational(x.p) + _arb_rational(q) * flint.arb(x.D).sqrt()


def _to_mp(b: flint.arb, digits: int):
    return mp.mpf(b.mid().str(digits + 5, radius=False, more=True))


def poly_roots(coeffs: Sequence, dps: int, conj: bool = False) -> tuple[list, mp.mpf]:
    """All complex roots of sum coeffs[j] x^j, to absolute accuracy 10^-dps.

    coeffs may be QuadRational (embedded by rho1, or rho2 when conj) or mpmath
    numbers.  Returns (roots, max_radius).
    """
    # input balls need room for the coefficient size on top of the target accuracy
    size = max((mp.log10(abs(c.embed(1)) + 1) if isinstance(c, QuadRational) else mp.log10(abs(c) + 1))
               for c in coeffs)
    old = flint.ctx.dps
    flint.ctx.dps = dps + 20 + int(size)
    try:
        acbs = []
        for c in coeffs:
            if isinstance(c, QuadRational):
                acbs.append(flint.acb(_arb_quad(c, conj)))
            else:
                c = mp.mpc(c)
                acbs.append(flint.acb(flint.arb(mp.nstr(c.real, dps + 20)),
                                      flint.arb(mp.nstr(c.imag, dps + 20))))
        try:
            raw = flint.acb_poly(acbs).roots(tol=flint.arb(10) ** (-dps - 5), maxprec=16 * (dps + 20) * 4)
        except ValueError as exc:
            raise RootError(str(exc)) from exc
        with mp.workdps(dps + 10):
            out = [mp.mpc(_to_mp(r.real, dps), _to_mp(r.imag, dps)) for r in raw]
            rad = max(mp.mpf(r.rad().mid().str(5, radius=False)) for r in raw)
    finally:
        flint.ctx.dps = old
    return out, rad
