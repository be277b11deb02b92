"""Weyl-Heisenberg displacements, the overlap matrix M and SIC certification.

D_{m,n} = tau^{mn} X^m Z^n with tau = -exp(pi i/d), X|k> = |k+1>, Z|k> = w^k|k>.
For odd d, tau = w^((d+1)/2) is itself a d-th root of unity.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import mpmath as mp
import numpy as np

from .roots import poly_roots


class SICError(RuntimeError):
    pass


def _zeta(d: int):
    return mp.expjpi(mp.mpf(2) / d)


def _tau_exp(d: int) -> int:
    return (d + 1) // 2


def displacement(d: int, m: int, n: int) -> mp.matrix:
    if d % 2 == 0:
        raise SICError("only odd d is supported")
    w = _zeta(d)
    t = _tau_exp(d)
    D = mp.matrix(d, d)
    for k in range(d):
        D[(k + m) % d, k] = w ** ((t * m * n + n * k) % d)
    return D


def max_abs(A: mp.matrix):
    return max(abs(A[i, j]) for i in range(A.rows) for j in range(A.cols))


def build_M(d: int, nu: Callable[[int, int], object] | Mapping, lam: int = 1) -> mp.matrix:
    """M = (1/d) sum_{m,n} nu_{m,n} D_{-m,-lam n}, assembled entrywise.

    D_{-m,-lam n} sends |k> to tau^{lam m n} w^{-lam n k} |k - m>.
    """
    get = nu if callable(nu) else (lambda m, n: nu[(m, n)])
    w = _zeta(d)
    t = _tau_exp(d)
    powers = [w ** e for e in range(d)]
    M = mp.matrix(d, d)
    for m in range(d):
        for n in range(d):
            c = get(m, n)
            if c == 0:
                continue
            for k in range(d):
                M[(k - m) % d, k] += c * powers[(t * lam * m * n - lam * n * k) % d]
    return M / d


def max_minor2(M: mp.matrix):
    """Largest 2x2 minor; zero for rank one."""
    n = M.rows
    best = mp.mpf(0)
    for i in range(n):
        for k in range(i + 1, n):
            for j in range(n):
                a, c = M[i, j], M[k, j]
                for l in range(j + 1, n):
                    best = max(best, abs(a * M[k, l] - M[i, l] * c))
    return best


def second_singular_bound(M: mp.matrix, v: Sequence):
    """Upper bound on the second singular value: ||M - v v^H||_F (Eckart-Young)."""
    d = M.rows
    return mp.sqrt(mp.fsum(abs(M[i, j] - v[i] * mp.conj(v[j])) ** 2 for i in range(d) for j in range(d)))


# --- overlaps on the conjugate side -------------------------------------------

@dataclass
class OverlapAssignment:
    d: int
    orbit: list            # r_k assigned to class exponent k
    amn: Mapping           # (m, n) -> exponent
    step_residual: mp.mpf
    modulus_error: mp.mpf
    root_radius: mp.mpf

    def nu(self, m: int, n: int):
        if (m % self.d, n % self.d) == (0, 0):
            return mp.mpf(1)
        return self.orbit[self.amn[(m % self.d, n % self.d)]]


def assign_conjugate_overlaps(gt_coeffs: Sequence, conj_step: Callable, amn: Mapping, d: int,
                              P: int) -> OverlapAssignment:
    """Roots of g~ ordered along the orbit of h~, starting at the largest real part.

    Each image h~(r) is snapped to the nearest certified root of g~, so
    rounding does not accumulate along the orbit; the snap distance is reported.
    """
    roots, rad = poly_roots(gt_coeffs, P)
    N = len(roots)
    with mp.workdps(P + 10):
        target = 1 / mp.sqrt(d + 1)
        moderr = max(abs(abs(z) - target) for z in roots)
        start = max(range(N), key=lambda i: (roots[i].real, roots[i].imag))
        order, seen = [start], {start}
        worst = mp.mpf(0)
        for _ in range(N - 1):
            img = conj_step(roots[order[-1]])
            i = min(range(N), key=lambda i: abs(roots[i] - img))
            worst = max(worst, abs(roots[i] - img))
            if i in seen:
                raise SICError("h~ orbit closes after %d steps" % len(order))
            order.append(i)
            seen.add(i)
        img = conj_step(roots[order[-1]])
        worst = max(worst, abs(roots[start] - img))
    tol = mp.mpf(10) ** (-P // 3)
    if worst > tol:
        raise SICError("h~ is inconsistent with the roots of g~ (step residual %s)" % mp.nstr(worst, 3))
    return OverlapAssignment(d, [roots[i] for i in order], dict(amn), worst, moderr, rad)


# --- certificates ------------------------------------------------------------

@dataclass
class FiducialCertificate:
    d: int
    v: list
    lam: int | None
    e_max: mp.mpf
    norm_error: mp.mpf
    idempotency_error: mp.mpf | None
    P: int
    overlaps: dict = field(default_factory=dict)
    gram_min_eig: float | None = None
    lambda_outcomes: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        tol = mp.mpf(10) ** (10 - self.P)
        return self.e_max < tol and self.norm_error < tol

    def to_json(self, digits: int | None = None) -> str:
        digits = digits or self.P
        s = lambda x: mp.nstr(x, digits, strip_zeros=False)
        out = {
            "d": self.d, "lambda": self.lam, "P": self.P, "valid": self.valid,
            "e_max": mp.nstr(self.e_max, 5), "norm_error": mp.nstr(self.norm_error, 5),
            "idempotency_error": None if self.idempotency_error is None else mp.nstr(self.idempotency_error, 5),
            "gram_min_eig": None if self.gram_min_eig is None else "%.12g" % self.gram_min_eig,
            "v": [[s(mp.mpc(x).real), s(mp.mpc(x).imag)] for x in self.v],
            "lambda_outcomes": self.lambda_outcomes,
        }
        return json.dumps(out, sort_keys=True)


def overlap_table(v: Sequence) -> dict:
    """<v, D_{m,n} v> for all (m, n)."""
    d = len(v)
    w = _zeta(d)
    t = _tau_exp(d)
    vc = [mp.conj(x) for x in v]
    out = {}
    for m in range(d):
        for n in range(d):
            acc = mp.fsum(vc[(k + m) % d] * w ** ((t * m * n + n * k) % d) * v[k] for k in range(d))
            out[(m, n)] = acc
    return out


def verify_sic(v: Sequence, P: int) -> FiducialCertificate:
    d = len(v)
    with mp.workdps(P + 10):
        v = [mp.mpc(x) for x in v]
        ov = overlap_table(v)
        nrm = mp.fsum(abs(x) ** 2 for x in v)
        target = mp.mpf(1) / (d + 1)
        e_max = max(abs(abs(ov[k]) ** 2 / nrm ** 2 - target) for k in ov if k != (0, 0))
        # Gram matrix of the d^2 projectors is a group convolution; its spectrum is a 2D DFT.
        tab = np.array([[float(abs(ov[(m, n)]) ** 2 / nrm ** 2) for n in range(d)] for m in range(d)])
        gmin = float(np.min(np.abs(np.fft.fft2(tab))))
        return FiducialCertificate(d, v, None, e_max, abs(nrm - 1), None, P, ov, gmin)


def extract_fiducial(M: mp.matrix) -> list:
    """Normalised dominant column of a rank-one projector, first entry real positive."""
    d = M.rows
    j = max(range(d), key=lambda i: abs(M[i, i]))
    v = [M[i, j] / mp.sqrt(M[j, j].real) for i in range(d)]
    first = next(x for x in v if abs(x) > mp.mpf(10) ** (-mp.mp.dps // 2))
    ph = abs(first) / first
    return [x * ph for x in v]


def _lambda_trial(args):
    d, nu, lam, dps = args
    with mp.workdps(dps):
        M = build_M(d, nu, lam)
        herm = max_abs(M - M.H)
        idem = max_abs(M * M - M)
        # mpmath matrices do not pickle; ship rows across the process boundary
        return lam, M.tolist(), herm, idem


def lambda_search_and_extract(ov: OverlapAssignment, P: int, lam: int | None = None,
                              threads: int = 1) -> FiducialCertificate:
    """Try every lambda (or just the given one); certify the first that works."""
    d = ov.d
    lams = [lam] if lam is not None else list(range(1, d))
    nu = {(m, n): ov.nu(m, n) for m in range(d) for n in range(d)}
    jobs = [(d, nu, l, P + 10) for l in lams]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            trials = list(ex.map(_lambda_trial, jobs))
    else:
        trials = [_lambda_trial(j) for j in jobs]
    tol = mp.mpf(10) ** (10 - P)
    outcomes = {}
    chosen = None
    with mp.workdps(P + 10):
        for l, rows, herm, idem in trials:
            M = mp.matrix(rows)
            ok = herm < tol and idem < tol
            rec = {"hermitian": mp.nstr(herm, 3), "idempotent": mp.nstr(idem, 3), "valid": False}
            if ok:
                minor = max_minor2(M)
                rec["minor"] = mp.nstr(minor, 3)
                if minor < tol:
                    v = extract_fiducial(M)
                    s2 = second_singular_bound(M, v)
                    rec["sigma2"] = mp.nstr(s2, 3)
                    if s2 < tol:
                        cert = verify_sic(v, P)
                        rec["e_max"] = mp.nstr(cert.e_max, 3)
                        rec["valid"] = cert.valid
                        if cert.valid and chosen is None:
                            cert.lam, cert.idempotency_error = l, idem
                            chosen = cert
            outcomes[l] = rec
    if chosen is None:
        raise SICError("no lambda gives a rank-one Hermitian projector: %s" % json.dumps(outcomes))
    chosen.lambda_outcomes = outcomes
    return chosen


def align_fiducial(v: Sequence, ref: Sequence, dps: int = 50) -> tuple[int, bool, mp.mpf]:
    """Best match of v to ref under k -> mu*k, optional conjugation, global phase.

    Returns (mu, conjugated, max entrywise error).  Dilations and complex
    conjugation map Heisenberg SICs to Heisenberg SICs, so these are the
    equivalences under which printed fiducials are compared.
    """
    d = len(v)
    best = (1, False, mp.inf)
    with mp.workdps(dps):
        for mu in range(1, d):
            for conj in (False, True):
                w = [v[(mu * k) % d] for k in range(d)]
                if conj:
                    w = [mp.conj(x) for x in w]
                ip = mp.fsum(mp.conj(a) * b for a, b in zip(w, ref))
                if ip == 0:
                    continue
                ph = ip / abs(ip)  # least-squares phase
                err = max(abs(w[k] * ph - ref[k]) for k in range(d))
                if err < best[2]:
                    best = (mu, conj, err)
    return best
