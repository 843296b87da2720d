import json
import subprocess
import sys

from padic_transfer import cli

RANK1 = json.dumps({"side": "S", "p": 3, "params": {"t": 0},
                    "element": {"gamma": [["1"]], "u1": ["27"], "u2": ["1"]}})


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_orb_output_format(capsys):
    code, out, _ = _run(capsys, "orb", RANK1)
    assert code == 0
    res = json.loads(out)
    assert set(res) == {"coeffs", "omega", "value0", "dvalue0_logq"}
    assert res["value0"] == 0 and res["dvalue0_logq"] == "-2"
    _, out, _ = _run(capsys, "dorb", RANK1)
    assert json.loads(out)["dvalue0_logq"] == "-2"


def test_campaign_reports_are_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        code, _, err = _run(capsys, "transfer-check", "--n", "1", "--t", "1", "--samples", "4",
                            "--seed", "7", "--out", str(path))
        assert code == 0 and "4/4 passed" in err
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rep = json.loads(paths[0].read_text())
    assert rep["config"]["seed"] == 7 and [r["case"] for r in rep["rows"]] == [0, 1, 2, 3]
    assert all("seed" in r for r in rep["rows"])


def test_parallel_run_matches_serial(tmp_path, capsys):
    a, b = tmp_path / "serial.json", tmp_path / "parallel.json"
    _run(capsys, "atc-check", "--regime", "maxorder", "--samples", "2", "--out", str(a))
    _run(capsys, "atc-check", "--regime", "maxorder", "--samples", "2", "--jobs", "2", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_empty_campaign(capsys):
    code, out, _ = _run(capsys, "transfer-check", "--samples", "0", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert all(x.startswith("#") for x in lines[:-1]) and lines[-1] == "case"
    assert "# failed_cases=" in lines


def test_failing_campaign_exits_nonzero(monkeypatch, capsys):
    def broken(seed, p, t0, v):
        if v == 3:
            raise RuntimeError("injected")
        return {"pass": True}

    monkeypatch.setattr(cli, "_rank1_case", broken)
    code, out, err = _run(capsys, "atc-check", "--regime", "rank1", "--vmin", "0", "--vmax", "4")
    assert code == 1 and "8/10 passed" in err
    rep = json.loads(out)
    assert rep["summary"]["failed_cases"] == [3, 8]
    assert "RuntimeError: injected" in rep["rows"][3]["error"]


def test_global_flags_after_the_subcommand(capsys):
    _, out, _ = _run(capsys, "atc-check", "--regime", "rank1", "--vmin", "0", "--vmax", "0", "--p", "5")
    assert json.loads(out)["config"]["p"] == 5
    _, out, _ = _run(capsys, "--p", "7", "atc-check", "--regime", "rank1", "--vmin", "0", "--vmax", "0")
    assert json.loads(out)["config"]["p"] == 7


def test_prec_flag_sets_the_environment(monkeypatch, capsys):
    from padic_transfer.padic import default_precision

    monkeypatch.setenv("PADIC_TRANSFER_PREC", "40")
    _run(capsys, "--prec", "23", "orb", RANK1)
    assert default_precision() == 23


def test_csv_output(capsys):
    code, out, _ = _run(capsys, "atc-check", "--regime", "rank1", "--vmin", "0", "--vmax", "2",
                        "--format", "csv")
    assert code == 0
    rows = [x for x in out.splitlines() if not x.startswith("#")]
    assert rows[0].startswith("case,") and len(rows) == 1 + 6


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "padic_transfer", "orb", RANK1],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["dvalue0_logq"] == "-2"


def test_bad_input_is_reported_without_a_traceback(capsys):
    code, out, err = _run(capsys, "tree", "{}")
    assert code == 2 and out == "" and "missing the field 'query'" in err
    degenerate = json.dumps({"side": "S", "element": {"gamma": [["1", "0"], ["0", "1"]],
                                                      "u1": ["1", "0"], "u2": ["1", "0"]}})
    code, _, err = _run(capsys, "orb", degenerate)
    assert code == 2 and "NotRegularSemisimple" in err
