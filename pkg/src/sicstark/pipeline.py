"""End-to-end runs: field, ray class group, Stark units, f/g/h and the fiducial.

Each stage records a JSON-serialisable dict in ``Run.stages`` so the CLI can
emit one report line per stage.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import mpmath as mp

from .lfun import ZetaTable, zeta_derivative_table
from .quadfield import FieldContext, make_field
from .rayclass import RayClassGroup, build_ray_class_group
from .recognition import (GaloisPolynomial, RecognizedPolynomial, SignAssignment, build_f, build_g,
                          conjugate_poly, recognition_precision, resolve_signs, solve_h)
from .sic import (FiducialCertificate, OverlapAssignment, assign_conjugate_overlaps, build_M,
                  lambda_search_and_extract, max_abs)

log = logging.getLogger("sicstark")

MIN_PRECISION = 30


@dataclass
class Run:
    d: int
    P: int
    cache_dir: Path | None = None
    threads: int = 1
    X: int | None = None
    ctx: FieldContext | None = None
    G: RayClassGroup | None = None
    zeta: ZetaTable | None = None
    f: RecognizedPolynomial | None = None
    signs: SignAssignment | None = None
    nus: list | None = None
    g: RecognizedPolynomial | None = None
    h: GaloisPolynomial | None = None
    overlaps: OverlapAssignment | None = None
    fiducial: FiducialCertificate | None = None
    working_precision: int | None = None
    stages: list = field(default_factory=list)

    def _record(self, stage: str, t0: float, **info) -> dict:
        rec = {"stage": stage, "d": self.d, "seconds": round(time.perf_counter() - t0, 3), **info}
        self.stages.append(rec)
        log.info("%s", rec)
        return rec

    def field(self) -> FieldContext:
        t0 = time.perf_counter()
        self.ctx = make_field(self.d)
        c = self.ctx
        self._record("field", t0, Delta=c.Delta, D=c.D, f=c.f, disc=c.disc,
                     fundamental_unit=repr(c.fundamental_unit), zauner_power=c.zauner_power,
                     class_number=c.class_number, narrow_class_number=c.narrow_class_number)
        return c

    def group(self) -> RayClassGroup:
        if self.ctx is None:
            self.field()
        t0 = time.perf_counter()
        self.G = build_ray_class_group(self.ctx)
        self._record("group", t0, order=self.G.N, structure=list(self.G.structure),
                     generator=str(self.G.generator), R_index=self.G.R_index)
        return self.G

    def stark(self, escalate: bool = True) -> ZetaTable:
        """Zeta derivatives at P digits, recomputed at the recognition precision if that is higher."""
        if self.G is None:
            self.group()
        t0 = time.perf_counter()
        tab = zeta_derivative_table(self.ctx, self.G, self.P, self.X, cache_dir=self.cache_dir, threads=self.threads)
        need = recognition_precision(tab.alpha, self.d)
        self.working_precision = self.P
        if escalate and need > self.P:
            log.info("d=%d: escalating precision %d -> %d", self.d, self.P, need)
            tab = zeta_derivative_table(self.ctx, self.G, need, self.X, cache_dir=self.cache_dir, threads=self.threads)
            self.working_precision = need
        self.zeta = tab
        with mp.workdps(self.P):
            self._record("zeta", t0, P=self.P, working_precision=self.working_precision, X=tab.X,
                         cache_hit=tab.cache_hit, max_imag=mp.nstr(tab.max_imag, 3),
                         max_L0=mp.nstr(tab.max_L0, 3),
                         antisymmetry=mp.nstr(tab.antisymmetry(self.G.R_index), 3),
                         Zprime=[mp.nstr(z, self.P) for z in tab.Zprime],
                         alpha=[mp.nstr(a, self.P) for a in tab.alpha])
        return tab

    def recognize(self, strategy: str = "search", g_known: RecognizedPolynomial | None = None) -> None:
        if self.zeta is None:
            self.stark()
        Pw = self.working_precision
        alpha = self.zeta.alpha
        t0 = time.perf_counter()
        self.f = build_f(alpha, self.ctx, Pw)
        self._record("f", t0, degree=self.f.degree, coeffs=[repr(c) for c in self.f.coeffs])
        t0 = time.perf_counter()
        m_test = real_side_test(self.d, self.G, alpha) if strategy == "bruteforce" else None
        self.signs, self.nus = resolve_signs(alpha, self.ctx, self.G, Pw, strategy, g_known, m_test)
        s = self.signs
        self._record("signs", t0, strategy=s.strategy, signs=s.signs, identity_sign=s.identity_sign,
                     flipped_by_convention=s.flipped_by_convention, convention_ok=s.convention_ok)
        t0 = time.perf_counter()
        self.g = build_g(self.nus, self.ctx, Pw, F=s.F)
        self._record("g", t0, degree=self.g.degree, coeffs=[repr(c) for c in self.g.coeffs])
        t0 = time.perf_counter()
        self.h = solve_h(self.nus, s.F, self.ctx, Pw)
        with mp.workdps(20):
            self._record("h", t0, degree=self.h.h.degree, coeffs=[repr(c) for c in self.h.h.coeffs],
                         vandermonde_residual=mp.nstr(self.h.vandermonde_residual, 3),
                         orbit_residual=mp.nstr(self.h.orbit_residual, 3))

    def build_fiducial(self, lam: int | None = None) -> FiducialCertificate:
        if self.h is None:
            self.recognize()
        Pw = self.working_precision
        t0 = time.perf_counter()
        gt = conjugate_poly(self.g)
        self.overlaps = assign_conjugate_overlaps(gt.coeffs, self.h.conj_step, self.G.amn_index, self.d, Pw)
        self.fiducial = lambda_search_and_extract(self.overlaps, Pw, lam, self.threads)
        c = self.fiducial
        self._record("fiducial", t0, **{"lambda": c.lam, "valid": c.valid, "e_max": mp.nstr(c.e_max, 3),
                                        "norm_error": mp.nstr(c.norm_error, 3),
                                        "gram_min_eig": "%.12g" % c.gram_min_eig,
                                        "step_residual": mp.nstr(self.overlaps.step_residual, 3)})
        return c


def real_side_test(d: int, G: RayClassGroup, alpha, dps: int = 30) -> Callable:
    """Accept a sign vector when the real overlaps give M^2 = M for some lambda."""
    return lambda signs: _real_idempotent(d, G.amn_index, signs, alpha, dps)


def _real_idempotent(d, amn, signs, alpha, dps) -> bool:
    with mp.workdps(dps):
        nus = [s * mp.sqrt(mp.mpf(a) / (d + 1)) for s, a in zip(signs, alpha)]
        nu = lambda m, n: mp.mpf(1) if (m, n) == (0, 0) else nus[amn[(m, n)]]
        tol = mp.mpf(10) ** (10 - dps)
        return any(max_abs(build_M(d, nu, lam) ** 2 - build_M(d, nu, lam)) < tol for lam in range(1, d))


def run_all(d: int, P: int, strategy: str = "search", g_known=None, lam=None, cache_dir=None,
            threads: int = 1) -> Run:
    run = Run(d, max(P, MIN_PRECISION), Path(cache_dir) if cache_dir else None, threads)
    run.group()
    if d == 23:
        return run
    run.stark()
    run.recognize(strategy, g_known)
    run.build_fiducial(lam)
    return run
