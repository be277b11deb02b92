import mpmath as mp
import numpy as np
import pytest

from sicstark import _kernels
from sicstark.lfun import (CacheError, LFunctionSpec, class_counts, class_kernel_sums, conductor_norm,
                           default_bound, lprime_at_zero, solve_root_number, zeta_derivative_table)
from sicstark.quadfield import make_field
from sicstark.rayclass import build_ray_class_group
from sicstark.reference import load_poly
from sicstark.roots import poly_roots

P = 50


@pytest.fixture(scope="module")
def setup5():
    ctx = make_field(5)
    return ctx, build_ray_class_group(ctx)


@pytest.fixture(scope="module")
def table5(setup5, tmp_path_factory):
    ctx, G = setup5
    return zeta_derivative_table(ctx, G, P, cache_dir=tmp_path_factory.mktemp("z5"))


def test_class_counts_match_element_oracle(setup5):
    ctx, G = setup5
    a = class_counts(ctx, G, 200).counts
    b = class_counts(ctx, G, 200, method="elements").counts
    assert (a == b).all()


@pytest.mark.parametrize("use_numba", [True, False])
def test_kernel_paths_agree(setup5, use_numba):
    ctx, G = setup5
    if use_numba and not _kernels.HAVE_NUMBA:
        pytest.skip("numba disabled")
    args = (ctx.D, ctx.D % 4 == 1, float(ctx.fundamental_unit.embed(1)), 500, 5, pow(ctx.f, -1, 5),
            G.class_table(), G.N)
    ref = class_counts(ctx, G, 500).counts
    assert (_kernels.count_by_elements(*args, use_numba=use_numba) == ref).all()


def test_root_numbers_and_vanishing_at_zero(setup5):
    ctx, G = setup5
    Q = conductor_norm(ctx)
    coeffs = class_counts(ctx, G, default_bound(Q, P))
    S = class_kernel_sums(coeffs, Q, P + 15)
    for chi in G.odd_characters():
        spec = LFunctionSpec(chi, Q, P)
        with mp.workdps(P + 15):
            W = solve_root_number(spec, S)
            lprime_at_zero(spec, S)
        assert abs(abs(W) - 1) < mp.mpf(10) ** -40
        assert spec.renorm_delta < mp.mpf(10) ** -40
        assert spec.split_residual < mp.mpf(10) ** (5 - P)


def test_kernel_sums_independent_of_threads(setup5):
    ctx, G = setup5
    Q = conductor_norm(ctx)
    coeffs = class_counts(ctx, G, 300)
    assert class_kernel_sums(coeffs, Q, 40, threads=1) == class_kernel_sums(coeffs, Q, 40, threads=3)


def test_alpha_are_roots_of_f5(table5):
    roots, _ = poly_roots(load_poly("f5").coeffs, 60)
    real = sorted(r.real for r in roots if abs(r.imag) < mp.mpf(10) ** -50)
    assert len(real) == 8
    for a, r in zip(sorted(table5.alpha), real):
        assert abs(a - r) < mp.mpf(10) ** -40


def test_product_of_alpha_is_one(table5):
    with mp.workdps(P + 10):
        assert abs(mp.fsum(table5.Zprime)) < mp.mpf(10) ** (5 - P)
        assert abs(mp.fprod(table5.alpha) - 1) < mp.mpf(10) ** (10 - P)


def test_antisymmetry(table5, setup5):
    assert table5.antisymmetry(setup5[1].R_index) < mp.mpf(10) ** (5 - P)
    assert table5.max_imag < mp.mpf(10) ** (5 - P)


def test_cache_roundtrip_and_checksum(setup5, tmp_path):
    ctx, G = setup5
    cold = zeta_derivative_table(ctx, G, 30, cache_dir=tmp_path)
    warm = zeta_derivative_table(ctx, G, 30, cache_dir=tmp_path)
    assert not cold.cache_hit and warm.cache_hit
    assert cold.Zprime == warm.Zprime
    path = next(tmp_path.glob("zeta_d5_P30_*.txt"))
    text = path.read_text().replace("Z 0 1.3", "Z 0 1.4")
    path.write_text(text)
    with pytest.raises(CacheError):
        zeta_derivative_table(ctx, G, 30, cache_dir=tmp_path)


def test_default_bound_grows_with_precision():
    Q = conductor_norm(make_field(5))
    assert default_bound(Q, 100) > default_bound(Q, 50) > 0


def test_numba_flag_disables_jit():
    import subprocess
    import sys
    env = {**__import__("os").environ, "SICSTARK_DISABLE_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", "from sicstark import _kernels; print(_kernels.HAVE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
