"""Published reference polynomials and fiducials bundled with the package."""
from __future__ import annotations

from importlib import resources

import mpmath as mp

from .recognition import RecognizedPolynomial

POLYNOMIALS = {"f5": "f5.txt", "g5": "g5.txt", "gt5": "gt5.txt", "f11": "f11.txt", "g11": "g11.txt"}
VECTORS = {"v5": "v5.txt", "v11": "v11.txt"}


class FixtureError(RuntimeError):
    pass


def _read(name: str) -> str:
    try:
        return resources.files("sicstark.fixtures").joinpath(name).read_text()
    except (FileNotFoundError, OSError) as exc:
        raise FixtureError("fixture %s missing" % name) from exc


def load_poly(key: str) -> RecognizedPolynomial:
    try:
        return RecognizedPolynomial.from_text(_read(POLYNOMIALS[key]))
    except (KeyError, ValueError) as exc:
        raise FixtureError("fixture %s corrupt or unknown" % key) from exc


def parse_vector(text: str) -> list:
    """Lines 're im' of decimal strings; '#' lines are comments."""
    out = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        re_, im = ln.split()
        out.append(mp.mpc(mp.mpf(re_), mp.mpf(im)))
    return out


def vector_digits(text: str) -> int:
    """Significant digits carried by the entries, the smallest over all entries."""
    digs = []
    for ln in text.splitlines():
        if ln.strip() and not ln.startswith("#"):
            for tok in ln.split():
                frac = tok.lstrip("-").split(".")
                if len(frac) == 2 and tok.strip("-0.") != "":
                    digs.append(len(frac[1]))
    return min(digs) if digs else 15


def load_vector(key: str) -> list:
    with mp.workdps(40):
        return parse_vector(_read(VECTORS[key]))


def vector_text(key: str) -> str:
    return _read(VECTORS[key])
