import json

import numpy as np
import pytest

from modgait import cli
from modgait.errors import ConfigError
from modgait.io import canonical_json, config_hash, read_archive, read_json, write_archive
from modgait.pipeline import apply_env_overrides, load_run_config

BASE_CONFIG = """
morphology = "hex"
gait = "tetrapod"

[terrain]
kind = "flat"

[optimizer]
population_size = 8
generations = 2
seed = 42

[simulation]
control_rate_hz = 30.0
cycles = 2
warmup_cycles = 1
"""


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(BASE_CONFIG)
    return p


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def test_optimize_writes_archive_and_log(config_path, tmp_path):
    out = tmp_path / "out"
    assert run_cli("optimize", "--config", config_path, "--out", out) == 0
    archive = read_archive(out / "archive.json")
    assert len(archive.entries) > 0
    assert archive.metadata["gait"] == "tetrapod"
    assert archive.metadata["seed"] == 42
    assert "version" in archive.metadata
    gen_lines = (out / "generations.csv").read_text().strip().splitlines()
    assert len(gen_lines) == 1 + 2  # header + one row per generation


def test_optimize_deterministic_reruns(config_path, tmp_path):
    run_cli("optimize", "--config", config_path, "--out", tmp_path / "a")
    run_cli("optimize", "--config", config_path, "--out", tmp_path / "b")
    assert (tmp_path / "a/archive.json").read_bytes() == (tmp_path / "b/archive.json").read_bytes()
    assert (tmp_path / "a/generations.csv").read_bytes() == (tmp_path / "b/generations.csv").read_bytes()


def test_optimize_jobs_identical_output(config_path, tmp_path):
    run_cli("optimize", "--config", config_path, "--out", tmp_path / "a")
    run_cli("optimize", "--config", config_path, "--jobs", 4, "--out", tmp_path / "j")
    assert (tmp_path / "a/archive.json").read_bytes() == (tmp_path / "j/archive.json").read_bytes()


def test_missing_config_exits_2(tmp_path):
    assert run_cli("optimize", "--config", tmp_path / "nope.toml", "--out", tmp_path) == 2


def test_invalid_toml_exits_2(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("morphology = [unclosed")
    assert run_cli("optimize", "--config", p, "--out", tmp_path) == 2


def test_unknown_key_exits_2(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text(BASE_CONFIG + "\n[objectives]\nshiny = 1\n")
    assert run_cli("optimize", "--config", p, "--out", tmp_path) == 2


def test_gait_leg_count_mismatch_exits_2(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text('morphology = "quad"\ngait = "wave"\n')
    assert run_cli("optimize", "--config", p, "--out", tmp_path) == 2


def test_eval_from_archive_matches_entry(config_path, tmp_path):
    out = tmp_path / "out"
    run_cli("optimize", "--config", config_path, "--out", out)
    archive = read_archive(out / "archive.json")
    ev = tmp_path / "ev"
    assert run_cli("eval", "--config", config_path, "--archive", out / "archive.json",
                   "--index", 0, "--out", ev) == 0
    summary = read_json(ev / "summary.json")
    assert np.array_equal(summary["objectives_min"], archive.entries[0].objectives)
    assert (ev / "trace.csv").exists()
    rows = (ev / "trace.csv").read_text().strip().splitlines()
    assert len(rows) == summary["trace"]["samples"] + 1


def test_eval_out_of_bounds_genome_named(config_path, tmp_path, capsys):
    genome = ",".join(["0.1"] * 12 + ["0.05", "0.7"])  # height below bound
    code = run_cli("eval", "--config", config_path, "--genome", genome,
                   "--out", tmp_path / "ev")
    assert code == 2
    assert "height_m" in capsys.readouterr().err


def test_eval_bad_genome_exits_2(config_path, tmp_path):
    assert run_cli("eval", "--config", config_path, "--genome", "0.1,abc",
                   "--out", tmp_path) == 2
    assert run_cli("eval", "--config", config_path, "--genome", "0.1,0.2",
                   "--out", tmp_path) == 2
    assert run_cli("eval", "--config", config_path, "--out", tmp_path) == 2


def test_eval_archive_index_out_of_range(config_path, tmp_path):
    out = tmp_path / "out"
    run_cli("optimize", "--config", config_path, "--out", out)
    assert run_cli("eval", "--config", config_path, "--archive", out / "archive.json",
                   "--index", 999, "--out", tmp_path / "ev") == 2


def test_two_objective_protocol_and_compare(config_path, tmp_path, capsys):
    a3 = tmp_path / "o3"
    a2 = tmp_path / "o2"
    run_cli("optimize", "--config", config_path, "--objectives", 3, "--out", a3)
    run_cli("optimize", "--config", config_path, "--objectives", 2, "--out", a2)
    two = read_archive(a2 / "archive.json")
    # 2-objective archives still carry full re-scored triples.
    assert all(len(e.objectives) == 3 for e in two.entries)
    assert run_cli("compare", "--with-load", a3 / "archive.json",
                   "--without-load", a2 / "archive.json", "--out", tmp_path / "cmp") == 0
    summary = read_json(tmp_path / "cmp/comparison.json")
    assert {"with_load", "without_load", "delta"} <= set(summary)


def test_compare_mismatched_seeds_exits_2(config_path, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_cli("optimize", "--config", config_path, "--out", a)
    run_cli("optimize", "--config", config_path, "--seed", 7, "--out", b)
    assert run_cli("compare", "--with-load", a / "archive.json",
                   "--without-load", b / "archive.json", "--out", tmp_path / "c") == 2


def test_regress_small_archive_exits_4(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    run_cli("optimize", "--config", config_path, "--out", out)
    code = run_cli("regress", "--archive", out / "archive.json", "--out", tmp_path / "r")
    # 8 individuals cannot support 14 explanatory variables.
    assert code == 4
    assert "observations" in capsys.readouterr().err


def test_regress_on_synthetic_archive(tmp_path):
    from modgait.analysis import ArchiveEntry, ParetoArchive
    from modgait.gait import gait_bounds

    rng = np.random.default_rng(5)
    lo, hi = gait_bounds("tetrapod")
    G = lo + rng.random((40, 14)) * (hi - lo)
    entries = [
        ArchiveEntry(genome=g, objectives=np.array([0.0, 0.0, 2 * g[12] + 1]))
        for g in G
    ]
    path = tmp_path / "archive.json"
    write_archive(path, ParetoArchive(entries=entries, metadata={"seed": 0}))
    assert run_cli("regress", "--archive", path, "--out", tmp_path / "r") == 0
    report = read_json(tmp_path / "r/regression.json")
    by_name = {v["name"]: v for v in report["variables"]}
    assert by_name["height_m"]["coef"] == pytest.approx(2.0, abs=1e-8)
    assert (tmp_path / "r/regression.txt").exists()


def test_regress_malformed_json_exits_2(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run_cli("regress", "--archive", p, "--out", tmp_path / "r") == 2


def test_matrix_single_cell(tmp_path, capsys):
    p = tmp_path / "m.toml"
    p.write_text(
        BASE_CONFIG.replace('morphology = "hex"', 'morphology = "quad"')
        .replace('gait = "tetrapod"', 'gait = "trot"')
        + '\n[matrix]\nmorphologies = ["quad"]\nterrains = ["flat"]\ngaits = ["trot"]\n'
    )
    assert run_cli("matrix", "--config", p, "--out", tmp_path / "mx") == 0
    table = (tmp_path / "mx/matrix.txt").read_text()
    assert "trot" in table and "flat" in table
    csv_lines = (tmp_path / "mx/matrix.csv").read_text().strip().splitlines()
    assert len(csv_lines) == 2  # header + single cell


def test_matrix_skip_marks_dash(tmp_path):
    p = tmp_path / "m.toml"
    p.write_text(
        BASE_CONFIG
        + '\n[matrix]\nmorphologies = ["hex"]\nterrains = ["flat", "step"]\n'
        'gaits = ["tetrapod"]\nskip = [["tetrapod", "step"]]\n'
    )
    assert run_cli("matrix", "--config", p, "--out", tmp_path / "mx") == 0
    rows = (tmp_path / "mx/matrix.csv").read_text().strip().splitlines()
    skipped = [r for r in rows if r.endswith(",-")]
    assert len(skipped) == 1 and "step" in skipped[0]


def test_matrix_empty_exits_2(tmp_path):
    p = tmp_path / "m.toml"
    p.write_text(BASE_CONFIG + "\n[matrix]\nmorphologies = []\nterrains = []\n")
    assert run_cli("matrix", "--config", p, "--out", tmp_path / "mx") == 2


def test_env_override(config_path, monkeypatch):
    monkeypatch.setenv("MODGAIT_OPTIMIZER__SEED", "7")
    cfg = load_run_config(config_path)
    assert cfg.evolution.rng_seed == 7
    monkeypatch.setenv("MODGAIT_SIMULATION__CYCLES", "5")
    cfg = load_run_config(config_path)
    assert cfg.simulation.cycles == 5


def test_env_override_parsing():
    data = apply_env_overrides({}, {"MODGAIT_TERRAIN__KIND": "slope",
                                    "MODGAIT_OPTIMIZER__SEED": "3",
                                    "MODGAIT_SIMULATION__IMPACT_PROXY": "false",
                                    "HOME": "/root"})
    assert data == {"terrain": {"kind": "slope"}, "optimizer": {"seed": 3},
                    "simulation": {"impact_proxy": False}}


def test_cli_seed_flag_overrides_config(config_path, tmp_path):
    out = tmp_path / "s"
    run_cli("optimize", "--config", config_path, "--seed", 9, "--out", out)
    assert read_archive(out / "archive.json").metadata["seed"] == 9


def test_archive_round_trip(config_path, tmp_path):
    out = tmp_path / "out"
    run_cli("optimize", "--config", config_path, "--out", out)
    archive = read_archive(out / "archive.json")
    copy = tmp_path / "copy.json"
    write_archive(copy, archive)
    again = read_archive(copy)
    assert len(again.entries) == len(archive.entries)
    for a, b in zip(archive.entries, again.entries):
        assert np.array_equal(a.genome, b.genome)
        assert np.array_equal(a.objectives, b.objectives)
    assert again.metadata == archive.metadata


def test_read_archive_rejects_non_archive(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"something": 1}))
    with pytest.raises(ConfigError):
        read_archive(p)


def test_canonical_json_and_hash():
    a = canonical_json({"b": np.float64(1.5), "a": np.array([1, 2])})
    assert a == '{"a":[1,2],"b":1.5}'
    assert config_hash({"x": 1}) == config_hash({"x": 1})
    assert config_hash({"x": 1}) != config_hash({"x": 2})


def test_archive_entries_mutually_nondominated(config_path, tmp_path):
    from oracles import brute_force_fronts

    out = tmp_path / "out"
    run_cli("optimize", "--config", config_path, "--out", out)
    archive = read_archive(out / "archive.json")
    feasible = [e for e in archive.entries if e.violation == 0.0]
    if len(feasible) >= 2:
        F = np.array([e.objectives for e in feasible])
        assert brute_force_fronts(F) == [list(range(len(F)))]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
