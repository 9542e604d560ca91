import json

import pytest

from sdym import cli, gauge

FAST = ["--jet-order", "3", "--lambda-order", "4"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, [json.loads(line) for line in out.out.splitlines()], out


def write_fixtures(tmp_path, records, name="fx.json"):
    path = tmp_path / name
    gauge.save_fixtures(path, records)
    return str(path)


def test_check_sdym_default(capsys):
    code, reports, _ = run(capsys, "check-sdym")
    assert code == 0 and len(reports) == 4
    assert all(r["pass"] for r in reports)
    for r in reports:
        assert set(r) == {"check", "inputs_digest", "residual", "tolerance", "pass"}
        assert r["pass"] == (r["residual"] <= r["tolerance"])


def test_corrupted_fixture_fails(capsys, tmp_path):
    rec = dict(gauge.DEFAULT_FIXTURES[0], flip=[2])
    code, reports, _ = run(capsys, "check-sdym", "--fixtures", write_fixtures(tmp_path, [rec]))
    assert code == 1
    assert all(not r["pass"] and r["residual"] > r["tolerance"] for r in reports)


def test_empty_fixture_list(capsys, tmp_path):
    code, reports, _ = run(capsys, "check-sdym", "--fixtures", write_fixtures(tmp_path, []))
    assert code == 0 and reports == []


def test_reports_are_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert cli.main(["check-rh", "--seed", "5", "--out", str(a)]) == 0
    assert cli.main(["check-rh", "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    ids = [json.loads(l)["check"] for l in lines]
    assert ids == sorted(ids)
    assert all(l == json.dumps(json.loads(l), sort_keys=True) for l in lines)


def test_worker_pool_does_not_change_reports(capsys, monkeypatch):
    _, serial, _ = run(capsys, "check-sdym")
    monkeypatch.setenv("SDYM_WORKERS", "3")
    _, pooled, _ = run(capsys, "check-sdym")
    assert serial == pooled


def test_zero_tolerance_fails_residual_checks(capsys):
    code, reports, _ = run(capsys, "check-sdym", "--tolerance-scale", "0")
    assert code == 1 and not any(r["pass"] for r in reports)


def test_timing_flag(capsys):
    _, reports, _ = run(capsys, "check-rh", "--timing")
    assert all(r["wall_time"] >= 0 for r in reports)


def test_config_file_and_overrides(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "tolerances": {"exact": 1e-9}, "probes": 20}))
    code, reports, _ = run(capsys, "check-sdym", "--config", str(cfg))
    assert code == 0 and all(r["tolerance"] == 1e-9 for r in reports)


@pytest.mark.parametrize("argv", [
    ["check-hidden", "--jet-order", "6", "--lambda-order", "2"],
    ["check-hidden", "--jet-order", "1", "--lambda-order", "7"],
    ["run-suite", "--suite", "sdym,bogus"],
    ["check-sdym", "--tolerance-scale", "-1"],
    ["check-sdym", "--fixtures", "/nonexistent/fixtures.json"],
])
def test_configuration_errors_exit_2(capsys, argv):
    code, reports, out = run(capsys, *argv)
    assert code == 2 and reports == [] and "configuration error" in out.err


def test_bad_config_values(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    for bad in ({"samples": 100}, {"samples": 32}, {"alpha": 1.5}, {"colour": 1}, {"n": 3}):
        cfg.write_text(json.dumps(bad))
        assert cli.main(["check-rh", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_validation_happens_before_computation(monkeypatch):
    called = []
    monkeypatch.setattr(cli, "load_records", lambda config: called.append(1) or [])
    with pytest.raises(cli.ConfigError):
        cli.run_suites(cli.RunConfig(lambda_order=2), ["sdym"])
    assert called == []


def test_manifest_suite(capsys):
    code, reports, _ = run(capsys, "check-manifest", *FAST)
    assert code == 0
    ids = {r["check"] for r in reports}
    assert {"manifest/closure", "manifest/commuting-so3", "manifest/00-bpst/conformal/K4"} <= ids


def test_hidden_suite(capsys):
    code, reports, _ = run(capsys, "check-hidden", *FAST)
    assert code == 0
    ids = {r["check"] for r in reports}
    assert "hidden/01-thooft/gauge-type/lam^2T3/symmetry" in ids
    assert "hidden/00-bpst/diffeo-type/lam^-1X1/consistency" in ids
    assert sum("algebra" in i for i in ids) == 20  # ten cases per fixture


def test_run_suite_is_the_union(capsys):
    _, sdym, _ = run(capsys, "check-sdym")
    _, rh, _ = run(capsys, "check-rh")
    code, both, _ = run(capsys, "run-suite", "--suite", "sdym,rh")
    assert code == 0
    assert both == sorted(sdym + rh, key=lambda r: r["check"])


def test_digest_depends_on_inputs(capsys):
    _, a, _ = run(capsys, "check-rh", "--seed", "1")
    _, b, _ = run(capsys, "check-rh", "--seed", "2")
    assert {r["inputs_digest"] for r in a}.isdisjoint({r["inputs_digest"] for r in b})
