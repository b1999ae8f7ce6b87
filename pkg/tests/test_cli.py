import csv
import json
import subprocess
import sys

import pytest

from dtriples.cli import (
    EXIT_ATTENTION,
    EXIT_OK,
    EXIT_PRECISION,
    EXIT_USAGE,
    RECORD_FIELDS,
    ConfigError,
    _exit_code,
    build_tasks,
    load_config,
    main,
    region_K_max,
    parse_range,
    read_records,
    sort_key,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, [json.loads(line) for line in out if line.startswith(("{", "["))]


def strip_time(path):
    recs = []
    for line in path.read_text(encoding="utf-8").splitlines():
        rec = json.loads(line)
        rec.pop("wall_time")
        recs.append(rec)
    return recs


# -- single-shot commands -------------------------------------------------------------


def test_family(capsys):
    code, [obj] = run(capsys, "family", "--A", "3", "--K", "3", "--eps", "-2")
    assert code == EXIT_OK
    assert obj["triple"] == [3, 15, 32] and obj["d_plus"] == 1540 and obj["id"] == "-2:3:3"


def test_family_degenerate_is_usage_error(capsys):
    code, _ = run(capsys, "family", "--A", "1", "--K", "1", "--eps", "-2")
    assert code == EXIT_USAGE


def test_verify(capsys):
    code, [obj] = run(capsys, "verify", "1", "3", "8", "120", "--n", "1")
    assert code == EXIT_OK and obj["valid"]
    code, [obj] = run(capsys, "verify", "1", "2", "3", "--n", "1")
    assert code == EXIT_ATTENTION and not obj["valid"]


def test_extend_methods_agree(capsys):
    _, [brute] = run(capsys, "extend", "--A", "3", "--K", "3", "--eps", "-2", "--d-max", "100000")
    _, [pell] = run(
        capsys, "extend", "--A", "3", "--K", "3", "--eps", "-2", "--d-max", "100000", "--method", "pell"
    )
    assert brute["extensions"] == pell["extensions"] == [1540]


def test_quintuple_survivors(capsys):
    code, [obj] = run(capsys, "quintuple", "--mode", "regular", "--delta-max", "10")
    assert code == EXIT_OK
    got = {tuple(t) for t in obj["survivors"]}
    assert got == {
        (35, 42456, 44929),
        (48, 109921, 114563),
        (21, 8928, 9815),
        (80, 510561, 523423),
        (99, 968320, 988001),
    }


def test_reduce_pair_and_delta(capsys):
    code, [obj] = run(capsys, "reduce", "--A", "3", "--K", "3", "--eps", "-2")
    assert code == EXIT_OK and obj["verdict"] == "unique-extension" and obj["new_bound"] <= 2
    code, [obj] = run(capsys, "reduce", "--delta", "6")
    assert code == EXIT_OK and obj["verdict"] == "unique-extension"


def test_bounds(capsys):
    code, [obj] = run(capsys, "bounds", "--A", "40", "--K", "9000", "--eps", "-2", "--nu-max", "30")
    assert code == EXIT_OK and obj["nu_floor"] >= 25


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["family", "--A", "3"])
    assert exc.value.code == EXIT_USAGE
    capsys.readouterr()
    assert main(["sweep", "--delta", "3..7"]) == EXIT_USAGE
    assert main(["sweep", "--A", "9..2"]) == EXIT_USAGE


# -- configuration ----------------------------------------------------------------------


def test_parse_range_and_region_bound():
    assert parse_range("2..39") == (2, 39)
    assert parse_range("7") == (7, 7)
    with pytest.raises(ConfigError):
        parse_range("9..2")
    # 240.24*4 + 740 = 1700.96 and 237.05*41 = 9719.05, both strict
    assert region_K_max(3) == 1700 and region_K_max(40) == 9719
    assert region_K_max(2811) == 0


def test_load_config(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# grid\nA = 2..3\nK-sample = 4  # per A\neps=-2\n", encoding="utf-8")
    assert load_config(str(cfg)) == {"A": "2..3", "K_sample": "4", "eps": "-2"}
    assert build_tasks(load_config(str(cfg))) == build_tasks({"A": "2..3", "K_sample": "4", "eps": "-2"})
    bad = tmp_path / "bad.cfg"
    bad.write_text("A 2..3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.cfg"))


def test_task_order_is_canonical():
    tasks = build_tasks({"A": "2..3", "K": "3..5", "eps": "2,-2", "delta": "6..7"})
    assert tasks == sorted(tasks, key=sort_key)
    assert tasks[0].startswith("-2:") and tasks[-1] == "delta:7"


# -- sweeps -----------------------------------------------------------------------------


GRID = ["--eps=-2,2", "--A", "2..6", "--K", "region-bound", "--K-sample", "6", "--nu-max", "10"]


def test_sweep_all_nu_excluded(tmp_path, capsys):
    out = tmp_path / "s.jsonl"
    code, [summary] = run(capsys, "sweep", *GRID, "--out", str(out))
    assert code == EXIT_OK
    recs = read_records(out)
    assert len(recs) == summary["records"] == 60
    assert {r["verdict"] for r in recs} == {"nu-excluded"}
    assert all(r["nu_floor"] >= 11 for r in recs)
    assert all(list(r) == list(RECORD_FIELDS) for r in recs)


def test_sweep_resume_matches_clean_run(tmp_path, capsys):
    full = tmp_path / "full.jsonl"
    run(capsys, "sweep", *GRID, "--out", str(full))
    part = tmp_path / "part.jsonl"
    lines = full.read_text(encoding="utf-8").splitlines()
    # an interrupted run: some records, out of order, then a torn line
    part.write_text("\n".join(lines[17:30] + lines[3:9]) + "\n" + lines[40][:25], encoding="utf-8")
    code, _ = run(capsys, "sweep", *GRID, "--out", str(part), "--resume")
    assert code == EXIT_OK
    assert strip_time(part) == strip_time(full)


def test_sweep_without_resume_starts_over(tmp_path, capsys):
    out = tmp_path / "s.jsonl"
    out.write_text('{"id": "-2:99:99", "verdict": "bogus"}\n', encoding="utf-8")
    run(capsys, "sweep", "--eps", "-2", "--A", "3", "--K", "3..5", "--nu-max", "10", "--out", str(out))
    assert [r["id"] for r in read_records(out)] == ["-2:3:3", "-2:3:4", "-2:3:5"]


def test_sweep_jobs_do_not_change_content(tmp_path, capsys):
    one, four = tmp_path / "one.jsonl", tmp_path / "four.jsonl"
    run(capsys, "sweep", *GRID, "--out", str(one), "--jobs", "1")
    run(capsys, "sweep", *GRID, "--out", str(four), "--jobs", "4")
    assert strip_time(one) == strip_time(four)


def test_sweep_csv_and_delta(tmp_path, capsys):
    out, table = tmp_path / "d.jsonl", tmp_path / "d.csv"
    code, _ = run(capsys, "sweep", "--delta", "6..8", "--out", str(out), "--csv", str(table))
    assert code == EXIT_OK
    rows = list(csv.DictReader(table.open(encoding="utf-8")))
    assert [r["id"] for r in rows] == ["delta:6", "delta:7", "delta:8"]
    assert {r["verdict"] for r in rows} == {"unique-extension"}


def test_exit_code_policy(capsys):
    ok = {"id": "-2:3:3", "verdict": "nu-excluded"}
    assert _exit_code([ok, {"id": "delta:6", "verdict": "unique-extension"}]) == EXIT_OK
    assert _exit_code([ok, {"id": "-2:3:4", "verdict": "needs-attention"}]) == EXIT_ATTENTION
    bad = {"id": "-2:3:5", "verdict": "precision-exhausted"}
    assert _exit_code([ok, bad, {"id": "-2:3:4", "verdict": "needs-attention"}]) == EXIT_PRECISION
    assert "-2:3:5" in capsys.readouterr().err


def test_jobs_from_environment(tmp_path):
    out = tmp_path / "env.jsonl"
    cmd = [sys.executable, "-m", "dtriples", "sweep", "--eps", "-2", "--A", "3", "--K", "3..8",
           "--nu-max", "10", "--out", str(out)]
    res = subprocess.run(cmd, env={"DTRIPLES_JOBS": "2", "PATH": ""}, capture_output=True, text=True)
    assert res.returncode == EXIT_OK, res.stderr
    assert len(read_records(out)) == 6
    res = subprocess.run(cmd, env={"DTRIPLES_JOBS": "0", "PATH": ""}, capture_output=True, text=True)
    assert res.returncode == EXIT_USAGE
