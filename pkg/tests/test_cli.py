import json

from specvol.cli import dispatch

CONST = {"kind": "constant", "level": 1.0}


def write_cfg(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run(args):
    return dispatch([str(a) for a in args])


def test_simulate_roundtrip(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "sim.json", {
        "schema_version": 1, "spec": CONST, "n": 64, "delta": 0.1, "seed": 5})
    out = tmp_path / "obs.csv"
    assert run(["simulate", "--config", cfg, "--out", out]) == 0
    assert out.exists() and out.with_suffix(".csv.json").exists()
    assert "simulate:" in capsys.readouterr().out


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1,,}')
    assert run(["simulate", "--config", bad, "--out", tmp_path / "x"]) == 1
    err = capsys.readouterr().err
    assert "line 1" in err and "column" in err


def test_schema_violation_names_field(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "sim.json", {
        "schema_version": 1, "spec": CONST, "n": -3, "delta": 0.1, "seed": 5})
    assert run(["simulate", "--config", cfg, "--out", tmp_path / "x"]) == 1
    assert "$.n" in capsys.readouterr().err


def test_bad_spec_kind(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "sim.json", {
        "schema_version": 1, "spec": {"kind": "mystery"}, "n": 4, "delta": 0.1, "seed": 5})
    assert run(["simulate", "--config", cfg, "--out", tmp_path / "x"]) == 1
    assert "spec" in capsys.readouterr().err


def test_spectral_and_seed_override(tmp_path):
    cfg = write_cfg(tmp_path, "sp.json", {
        "schema_version": 1, "spec": CONST, "n": 1024, "delta": 0.2,
        "seed": 5, "h0": 8.0, "J": 3})
    out1, out2, out3 = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert run(["spectral", "--config", cfg, "--out", out1]) == 0
    assert run(["spectral", "--config", cfg, "--out", out2]) == 0
    assert run(["spectral", "--config", cfg, "--out", out3, "--seed", "6"]) == 0
    assert out1.read_text() == out2.read_text()
    assert out1.read_text() != out3.read_text()


def test_spot_and_iv(tmp_path):
    common = {"schema_version": 1, "spec": CONST, "n": 2048, "delta": 0.2,
              "seed": 3, "h0_rule": 8.0, "J_rule": 8}
    spot_cfg = write_cfg(tmp_path, "spot.json", {**common, "grid_points": 33})
    out = tmp_path / "spot.json.out"
    assert run(["spot", "--config", spot_cfg, "--out", out]) == 0
    curve = json.loads(out.read_text())
    assert len(curve["t"]) == 33 and len(curve["estimate"]) == 33

    iv_cfg = write_cfg(tmp_path, "iv.json", common)
    out2 = tmp_path / "iv.json.out"
    assert run(["iv", "--config", iv_cfg, "--out", out2]) == 0
    record = json.loads(out2.read_text())
    assert {"value", "avar_hat", "n", "delta", "h0", "J", "seed"} <= set(record)


def test_mc_iv_acceptance_gate(tmp_path, capsys):
    base = {
        "schema_version": 1, "spec": CONST, "n": 1024, "delta": 0.3,
        "replications": 16, "master_seed": 4, "h0_rule": 8.0, "J_rule": 16,
        "bandwidth_rule": 0.3,
        "per_replication_csv": str(tmp_path / "reps.csv"),
    }
    ok_cfg = write_cfg(tmp_path, "ok.json", base)
    out = tmp_path / "mc.json"
    assert run(["mc-iv", "--config", ok_cfg, "--out", out]) == 0
    payload = json.loads(out.read_text())
    assert payload["summary"]["replications"] == 16
    assert (tmp_path / "reps.csv").exists()
    # unreachable variance tolerance flips the exit code to 2
    strict = dict(base, acceptance={"variance_rtol": 1e-9})
    bad_cfg = write_cfg(tmp_path, "strict.json", strict)
    assert run(["mc-iv", "--config", bad_cfg, "--out", tmp_path / "mc2.json"]) == 2


def test_rate_command(tmp_path):
    cfg = write_cfg(tmp_path, "rate.json", {
        "schema_version": 1,
        "base": {"spec": CONST, "delta": 0.5, "replications": 12, "master_seed": 2,
                 "h0_rule": 8.0, "J_rule": 8, "bandwidth_rule": 0.3},
        "n_list": [256, 512, 1024, 2048],
    })
    out = tmp_path / "rate.json.out"
    assert run(["rate", "--config", cfg, "--out", out]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["iv_rmse"]) == 4


def test_fisher_command(tmp_path):
    cfg = write_cfg(tmp_path, "fisher.json", {
        "schema_version": 1, "thetas": [1.0], "h0s": [5.0], "jmax": 10**5})
    out = tmp_path / "fisher.csv"
    assert run(["fisher", "--config", cfg, "--out", out]) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "theta,h0,I_closed,I_sum,rel_err"
    rel = float(rows[1].split(",")[-1])
    assert rel < 1e-8


def test_hellinger_command(tmp_path):
    cfg = write_cfg(tmp_path, "hell.json", {
        "schema_version": 1, "dim": 5, "trials": 10, "seed": 3})
    out = tmp_path / "hell.csv"
    assert run(["hellinger", "--config", cfg, "--out", out]) == 0
    assert len(out.read_text().strip().splitlines()) == 11


def test_decay_command(tmp_path):
    cfg = write_cfg(tmp_path, "decay.json", {
        "schema_version": 1, "spec": CONST, "delta": 0.5, "n_list": [64, 128, 256]})
    out = tmp_path / "decay.csv"
    assert run(["decay", "--config", cfg, "--out", out]) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "n,H2,bound,slope_so_far"
    assert len(rows) == 4


def test_counterexample_command(tmp_path):
    cfg = write_cfg(tmp_path, "ce.json", {
        "schema_version": 1, "n_list": [256, 1024], "ks_samples": 2000, "seed": 1})
    out = tmp_path / "ce.json.out"
    assert run(["counterexample", "--config", cfg, "--out", out]) == 0
    payload = json.loads(out.read_text())
    assert payload["ks_pvalue"] > 0.0
    assert set(payload["gaps"]) == {"256", "1024"}


def test_threads_env_fallback(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, "mc.json", {
        "schema_version": 1, "spec": CONST, "n": 1024, "delta": 0.3,
        "replications": 6, "master_seed": 4, "h0_rule": 8.0, "J_rule": 8,
        "bandwidth_rule": 0.3})
    out1, out2 = tmp_path / "m1.json", tmp_path / "m2.json"
    monkeypatch.setenv("SPECVOL_THREADS", "2")
    assert run(["mc-iv", "--config", cfg, "--out", out1]) == 0
    monkeypatch.delenv("SPECVOL_THREADS")
    assert run(["mc-iv", "--config", cfg, "--out", out2, "--threads", "1"]) == 0
    p1, p2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    assert p1["config"]["parallelism"] == 2
    assert p2["config"]["parallelism"] == 1
    s1 = {k: v for k, v in p1["summary"].items() if k != "wall_time"}
    s2 = {k: v for k, v in p2["summary"].items() if k != "wall_time"}
    assert s1 == s2
