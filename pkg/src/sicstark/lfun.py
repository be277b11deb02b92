"""Hecke L-functions of ray class characters and the differenced zeta table.

For a character chi odd at R the completed function is

    Lambda(s) = A^s Gamma(s) L(s, chi),   A = sqrt(Q) / (2 pi),

with Gamma_R(s) Gamma_R(s+1) = Gamma_C(s) absorbing both real places.  The
theta series theta(t) = sum a_n exp(-n t / A) satisfies
theta(1/t) = W t conj(theta)(t), and splitting the Mellin integral at t gives

    Lambda(0) = sum a_n E1(n t / A) + W sum conj(a_n) (A / n) exp(-n / (t A)).

Lambda(0) = L'(0, chi) because Gamma has a simple pole at 0 and L(0, chi) = 0.
Every sum is linear in the per-class counts, so each kernel is summed once per
class and characters cost O(N) each.
"""
from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import mpmath as mp
import numpy as np

from . import _kernels
from .quadfield import FieldContext, FieldError, enumerate_ideals
from .rayclass import Character, RayClassGroup

GUARD_DIGITS = 15
# t values for the root number and its cross-check, and the alternate split point
_T1, _T2, _TSPLIT = mp.mpf("1.05"), mp.mpf("1.15"), mp.mpf("1.1")
_TMAX = 1.15


class LFunctionError(RuntimeError):
    pass


class CacheError(RuntimeError):
    pass


@dataclass
class DirichletCoeffs:
    X: int
    counts: np.ndarray  # shape (N, X+1)

    def total(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass
class LFunctionSpec:
    character: Character
    Q: int
    P: int
    W: mp.mpc | None = None
    renorm_delta: mp.mpf | None = None
    fe_residual: mp.mpf | None = None
    split_residual: mp.mpf | None = None


@dataclass
class ZetaTable:
    d: int
    P: int
    X: int
    Q: int
    Zprime: list
    alpha: list
    W: dict[int, mp.mpc] = field(default_factory=dict)
    max_imag: mp.mpf = mp.mpf(0)
    max_L0: mp.mpf = mp.mpf(0)
    cache_hit: bool = False

    def antisymmetry(self, R_index: int) -> mp.mpf:
        N = len(self.Zprime)
        return max(abs(self.Zprime[k] + self.Zprime[(k + R_index) % N]) for k in range(N))


def class_counts(ctx: FieldContext, G: RayClassGroup, X: int, method: str = "ideals") -> DirichletCoeffs:
    """a_n(A) for n <= X.  method='elements' uses the fundamental-domain oracle."""
    if ctx.class_number != 1:
        raise FieldError("class counts need class number 1")
    if method == "elements":
        eps0 = float(ctx.fundamental_unit.embed(1))
        counts = _kernels.count_by_elements(ctx.D, ctx.D % 4 == 1, eps0, X, ctx.d,
                                            pow(ctx.f, -1, ctx.d), G.class_table(), G.N)
        return DirichletCoeffs(X, counts)
    counts = np.zeros((G.N, X + 1), dtype=np.int64)
    for n, ideals in enumerate_ideals(ctx, X).items():
        if n % ctx.d == 0:
            continue
        for I in ideals:
            counts[G.class_of_element(I.generator), n] += 1
    return DirichletCoeffs(X, counts)


def conductor_norm(ctx: FieldContext) -> int:
    return ctx.disc * ctx.d ** 2


def default_bound(Q: int, P: int) -> int:
    """Smallest X with exp(-X/(t A)) below 10^-(P+25) for every test point t."""
    A = math.sqrt(Q) / (2 * math.pi)
    return int(_TMAX * A * math.log(10) * (P + GUARD_DIGITS + 10)) + 10


def _kernel_chunk(args):
    ns, dps, Q = args
    with mp.workdps(dps):
        A = mp.sqrt(Q) / (2 * mp.pi)
        out = []
        for n in ns:
            x = n / A
            out.append((
                mp.e1(x),                        # E1(n/A)
                mp.exp(-x) / x,                  # (A/n) e^{-n/A}
                mp.e1(x * _TSPLIT),              # split at t
                mp.exp(-x / _TSPLIT) / x,
                mp.exp(-x * _T1), mp.exp(-x / _T1),
                mp.exp(-x * _T2), mp.exp(-x / _T2),
            ))
        return out


N_KERNELS = 8


def class_kernel_sums(coeffs: DirichletCoeffs, Q: int, dps: int, threads: int = 1) -> list[list]:
    """S[i][k] = sum_n a_n(class k) * kernel_i(n), summed in increasing n."""
    counts = coeffs.counts
    ns = [int(n) for n in np.nonzero(counts.sum(axis=0))[0] if n > 0]
    chunks = [ns[i::max(1, threads)] for i in range(max(1, threads))]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_kernel_chunk, [(c, dps, Q) for c in chunks]))
    else:
        parts = [_kernel_chunk((ns, dps, Q))]
        chunks = [ns]
    kern = {}
    for c, part in zip(chunks, parts):
        kern.update(zip(c, part))
    N = counts.shape[0]
    with mp.workdps(dps):
        S = [[mp.mpf(0)] * N for _ in range(N_KERNELS)]
        for k in range(N):
            row = counts[k]
            nz = [int(n) for n in np.nonzero(row)[0]]
            for i in range(N_KERNELS):
                S[i][k] = mp.fsum(int(row[n]) * kern[n][i] for n in nz)
    return S


def _twist(chi: Character, S_i: list):
    return mp.fsum(chi.value(k) * S_i[k] for k in range(len(S_i)) if S_i[k])


def solve_root_number(spec: LFunctionSpec, S: list) -> mp.mpc:
    """W from theta(1/t) = W t conj(theta(t)) at t = 1.05, checked at t = 1.15."""
    chi = spec.character
    tol = mp.mpf(10) ** (5 - spec.P)
    W1 = _twist(chi, S[5]) / (_T1 * mp.conj(_twist(chi, S[4])))
    W2 = _twist(chi, S[7]) / (_T2 * mp.conj(_twist(chi, S[6])))
    spec.fe_residual = abs(W1 - W2)
    spec.renorm_delta = abs(abs(W1) - 1)
    if spec.fe_residual > tol or spec.renorm_delta > tol:
        raise LFunctionError("functional equation fails for j=%d (residual %s)"
                             % (chi.j, mp.nstr(spec.fe_residual, 3)))
    spec.W = W1 / abs(W1)
    return spec.W


def lprime_at_zero(spec: LFunctionSpec, S: list) -> mp.mpc:
    """L'(0, chi), after checking that Lambda(0) does not depend on the split point.

    A nonzero L(0, chi) would add a polar term L(0) * log(t) to the split formula,
    so the split residual doubles as the test |L(0, chi)| ~ 0.
    """
    chi = spec.character
    if chi.at_R != -1:
        raise LFunctionError("character is even at R")
    if spec.W is None:
        solve_root_number(spec, S)
    W = spec.W
    lam1 = _twist(chi, S[0]) + W * mp.conj(_twist(chi, S[1]))
    lam2 = _twist(chi, S[2]) + W * mp.conj(_twist(chi, S[3]))
    spec.split_residual = abs(lam1 - lam2) / abs(mp.log(_TSPLIT))
    if spec.split_residual > mp.mpf(10) ** (5 - spec.P):
        raise LFunctionError("L(0, chi) not small for j=%d: %s" % (chi.j, mp.nstr(spec.split_residual, 3)))
    return lam1


def _cache_path(cache_dir: Path, d: int, P: int, X: int) -> Path:
    return Path(cache_dir) / ("zeta_d%d_P%d_X%d.txt" % (d, P, X))


def _write_cache(path: Path, tab: ZetaTable) -> None:
    digits = tab.P + GUARD_DIGITS
    body = ["Z %d %s" % (k, mp.nstr(z, digits, strip_zeros=False)) for k, z in enumerate(tab.Zprime)]
    body += ["W %d %s %s" % (j, mp.nstr(w.real, digits, strip_zeros=False),
                             mp.nstr(w.imag, digits, strip_zeros=False)) for j, w in sorted(tab.W.items())]
    body += ["imag %s" % mp.nstr(tab.max_imag, 5), "L0 %s" % mp.nstr(tab.max_L0, 5)]
    text = "\n".join(body) + "\n"
    head = "# sicstark zeta table\nd %d\nP %d\nX %d\nQ %d\nsha256 %s\n" % (
        tab.d, tab.P, tab.X, tab.Q, hashlib.sha256(text.encode()).hexdigest())
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(head + text)
    os.replace(tmp, path)


def _read_cache(path: Path) -> ZetaTable:
    lines = path.read_text().splitlines(keepends=True)
    head = {ln.split()[0]: ln.split()[1] for ln in lines[1:6]}
    text = "".join(lines[6:])
    if hashlib.sha256(text.encode()).hexdigest() != head.get("sha256"):
        raise CacheError("checksum mismatch in %s" % path)
    P = int(head["P"])
    with mp.workdps(P + GUARD_DIGITS):
        Z, W = [], {}
        imag = L0 = mp.mpf(0)
        for ln in text.splitlines():
            f = ln.split()
            if f[0] == "Z":
                Z.append(mp.mpf(f[2]))
            elif f[0] == "W":
                W[int(f[1])] = mp.mpc(f[2], f[3])
            elif f[0] == "imag":
                imag = mp.mpf(f[1])
            elif f[0] == "L0":
                L0 = mp.mpf(f[1])
        alpha = [mp.exp(z) for z in Z]
    return ZetaTable(d=int(head["d"]), P=P, X=int(head["X"]), Q=int(head["Q"]), Zprime=Z,
                     alpha=alpha, W=W, max_imag=imag, max_L0=L0, cache_hit=True)


def zeta_derivative_table(ctx: FieldContext, G: RayClassGroup, P: int, X: int | None = None,
                          cache_dir: str | Path | None = None, threads: int = 1) -> ZetaTable:
    """Z_A'(0) and alpha_A = exp(Z_A'(0)) for every class, indexed by exponent."""
    Q = conductor_norm(ctx)
    if X is None:
        X = default_bound(Q, P)
    if cache_dir is not None:
        path = _cache_path(Path(cache_dir), ctx.d, P, X)
        if path.exists():
            return _read_cache(path)
    dps = P + GUARD_DIGITS
    coeffs = class_counts(ctx, G, X)
    S = class_kernel_sums(coeffs, Q, dps, threads)
    N = G.N
    tol = mp.mpf(10) ** (5 - P)
    with mp.workdps(dps):
        Lp, W = {}, {}
        max_L0 = mp.mpf(0)
        for chi in G.odd_characters():
            spec = LFunctionSpec(chi, Q, P)
            Lp[chi.j] = lprime_at_zero(spec, S)
            W[chi.j] = spec.W
            max_L0 = max(max_L0, spec.split_residual)
        Z = []
        for k in range(N):
            z = 2 * mp.fsum(mp.expjpi(mp.mpf(-2 * (j * k % N)) / N) * Lp[j] for j in sorted(Lp)) / N
            Z.append(z)
        max_imag = max(abs(z.imag) for z in Z)
        if max_imag > tol:
            raise LFunctionError("imaginary part %s survives assembly" % mp.nstr(max_imag, 3))
        Zr = [z.real for z in Z]
        tab = ZetaTable(d=ctx.d, P=P, X=X, Q=Q, Zprime=Zr, alpha=[mp.exp(z) for z in Zr], W=W,
                        max_imag=max_imag, max_L0=max_L0)
    if cache_dir is not None:
        _write_cache(path, tab)
        tab = _read_cache(path)
        tab.cache_hit = False
    return tab
