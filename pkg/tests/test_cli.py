import json
import random
from importlib import resources

import mpmath as mp
import pytest

from sicstark.cli import EXIT_CONFIG, EXIT_INVALID, EXIT_STAGE, EXIT_VALID, fixture_suite, main
from sicstark.reference import load_poly


def run_cli(args, tmp_path, name="report.jsonl"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, [json.loads(l) for l in out.read_text().splitlines()]


def payload(lines):
    """Report lines without wall-clock and cache bookkeeping."""
    return [{k: v for k, v in rec.items() if k not in ("seconds", "cache_hit")} for rec in lines]


def fixture_path(name):
    return str(resources.files("sicstark.fixtures").joinpath(name))


def test_group_d23(tmp_path):
    code, lines = run_cli(["group", "--d", "23"], tmp_path)
    assert code == EXIT_VALID
    group = next(l for l in lines if l["stage"] == "group")
    assert group["structure"] == [2, 176]
    assert not any(l["stage"] == "fiducial" for l in lines)


def test_all_d23_stops_after_group(tmp_path):
    code, lines = run_cli(["all", "--d", "23"], tmp_path)
    assert code == EXIT_VALID
    assert [l["stage"] for l in lines] == ["field", "group", "summary"]


def test_verify_published(tmp_path):
    code, lines = run_cli(["verify", "--d", "5", "--fiducial", fixture_path("v5.txt")], tmp_path)
    assert code == EXIT_VALID
    assert mp.mpf(lines[0]["e_max"]) < mp.mpf(10) ** -17


def test_verify_random_is_invalid(tmp_path):
    rng = random.Random(11)
    vec = tmp_path / "rand.txt"
    vec.write_text("\n".join("%.20f %.20f" % (rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(5)))
    code, lines = run_cli(["verify", "--fiducial", str(vec)], tmp_path)
    assert code == EXIT_INVALID and lines[0]["valid"] is False


@pytest.mark.parametrize("args", [
    ["all", "--d", "5", "--precision", "20"],
    ["all", "--d", "7"],
    ["zeta", "--d", "23"],
    ["all", "--d", "5", "--sign-strategy", "guess"],
    ["all", "--d", "5", "--sign-strategy", "known_g:/nonexistent/g5.txt"],
    ["verify", "--d", "5"],
    ["fiducial", "--d", "5", "--lambda", "9"],
])
def test_config_errors(args, tmp_path):
    code, lines = run_cli(args, tmp_path)
    assert code == EXIT_CONFIG and lines[-1]["stage"] == "config"


def test_stage_error_is_tagged(tmp_path, cache_dir):
    bad = load_poly("g5")
    bad.coeffs[3] = bad.coeffs[3] + 1
    g = tmp_path / "g5_bad.txt"
    g.write_text(bad.to_text())
    code, lines = run_cli(["recognize", "--d", "5", "--cache-dir", str(cache_dir),
                           "--sign-strategy", "known_g:%s" % g], tmp_path)
    assert code == EXIT_STAGE
    err = next(l for l in lines if l["stage"] == "error")
    assert err["after"] == "f" and err["error"]


def test_all_d5_valid_and_matches_fixtures(tmp_path):
    code, lines = run_cli(["all", "--d", "5", "--precision", "50", "--write-polys", str(tmp_path / "polys")],
                          tmp_path)
    assert code == EXIT_VALID
    summary = lines[-1]
    assert summary["valid"] and mp.mpf(summary["certificate"]["e_max"]) < mp.mpf(10) ** -40
    for name in ("f5", "g5"):
        got = (tmp_path / "polys" / ("%s.txt" % name)).read_text()
        assert got == load_poly(name).to_text()


def test_zeta_cache_reused(tmp_path):
    cache = tmp_path / "cache"
    _, cold = run_cli(["zeta", "--d", "11", "--cache-dir", str(cache)], tmp_path, "a.jsonl")
    _, warm = run_cli(["zeta", "--d", "11", "--cache-dir", str(cache)], tmp_path, "b.jsonl")
    zc = next(l for l in cold if l["stage"] == "zeta")
    zw = next(l for l in warm if l["stage"] == "zeta")
    assert not zc["cache_hit"] and zw["cache_hit"]
    assert zw["seconds"] < 0.01 * zc["seconds"] + 0.05
    assert payload([zc]) == payload([zw])


def test_threads_do_not_change_numbers(tmp_path):
    _, one = run_cli(["all", "--d", "5", "--threads", "1"], tmp_path, "t1.jsonl")
    _, two = run_cli(["all", "--d", "5", "--threads", "3"], tmp_path, "t3.jsonl")
    assert json.dumps(payload(one), sort_keys=True) == json.dumps(payload(two), sort_keys=True)


def test_fixture_suite(cache_dir):
    results = fixture_suite(cache_dir)
    assert {r[0] for r in results} == {"f5", "g5", "gt5", "v5", "f11", "g11", "v11"}
    assert all(ok for _, ok, _ in results), results
