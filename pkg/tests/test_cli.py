import csv
import io
import json
import subprocess
import sys

import pytest

from holderlab.cli import RunConfig, main, run

UNIT = ["--box", "0:1,0:1"]
POROUS = ["--box", "0:1,0:3", "--p", "4 - 0.1*x", "--p", "3 + 0.2*y"]


def call(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_beta_uniform(capsys):
    code, out, _ = call(["beta", *UNIT, "--p", "4", "--resolutions", "8"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["beta"]["min"] == [0.5, 0.5] and d["beta"]["max"] == [0.5, 0.5]
    assert d["config"]["p"] == ["4"] and d["hypothesis"]["satisfied"]


def test_beta_rational(capsys):
    code, out, _ = call(["beta", *UNIT, "--p", "4", "--p", "8", "--resolutions", "4"], capsys)
    d = json.loads(out)
    assert abs(d["beta"]["min"][0] - 5 / 9) <= 1e-12
    assert abs(d["beta"]["min"][1] - 5 / 7) <= 1e-12


def test_beta_csv(tmp_path, capsys):
    path = tmp_path / "beta.csv"
    code, out, _ = call(["beta", *UNIT, "--p", "3 + x1", "--p", "4", "--resolutions", "5",
                         "--format", "csv", "--out", str(path)], capsys)
    assert code == 0 and json.loads(out)["grid"]["active_cells"] == 25
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == 25 and set(rows[0]) >= {"i1", "x2", "value", "beta_1", "beta_2"}
    assert float(rows[0]["value"]) == 3.1


def test_norms_constant(capsys):
    code, out, _ = call(["norms", *UNIT, "--p", "4", "--u", "1", "--resolutions", "8"], capsys)
    d = json.loads(out)
    assert code == 0
    assert d["hoelder"]["norm"] == 1.0 and abs(d["sobolev"]["value"] - 1) < 1e-9
    assert abs(d["ratio"] - 1) < 1e-9


def test_norms_porous_ratio_recomputed(capsys):
    code, out, _ = call(["norms", *POROUS, "--u", "sin(2*pi*x)*y^2*exp(-y)",
                         "--resolutions", "64", "--seed", "0"], capsys)
    d = json.loads(out)
    assert code == 0
    assert d["ratio"] == d["hoelder"]["norm"] / d["sobolev"]["value"]
    assert d["hoelder"]["mode"] == "sampled" and d["hoelder"]["seed"] == 0


def test_heat_gating(capsys):
    code, _, err = call(["app", "heat", "--resolutions", "32"], capsys)
    assert code == 4 and "violating_cells=" in err
    count = int(err.split("violating_cells=")[1].split(")")[0])
    assert count > 0
    code, out, _ = call(["app", "heat", "--resolutions", "32", "--allow-hypothesis-violation"],
                        capsys)
    assert code == 0
    assert json.loads(out)["levels"][0]["hypothesis"]["violating_cells"] == count


def test_porous_app_clean(capsys):
    code, out, _ = call(["app", "porous", "--resolutions", "32"], capsys)
    d = json.loads(out)
    assert code == 0 and d["levels"][0]["hypothesis"]["violating_cells"] == 0
    assert d["config"]["preset"] == "porous" and d["header"]["spec"]["preset"] == "porous"


@pytest.mark.parametrize("argv,status", [
    (["beta", *UNIT, "--p", "x3"], 2),
    (["beta", *UNIT, "--p", "4 +"], 2),
    (["beta", "--box", "1:0,0:1", "--p", "4"], 2),
    (["beta", *UNIT], 2),
    (["beta", *UNIT, "--p", "4", "--p", "4", "--p", "4"], 2),
    (["beta", *UNIT, "--p", "0.5"], 3),
    (["beta", *UNIT, "--p", "4", "--predicate", "x1 > 5"], 3),
    (["norms", *UNIT, "--p", "4", "--u", "sqrt(x1 - 2)", "--resolutions", "4"], 3),
    (["norms", *UNIT, "--p", "4", "--resolutions", "4"], 2),
    (["norms", *UNIT, "--p", "1.5 + x1", "--u", "x1", "--resolutions", "4"], 4),
    (["norms", *UNIT, "--p", "4", "--u", "x1", "--resolutions", "2000"], 2),
    (["beta", "--box", "0:1,0:1,0:1", "--p", "1.1", "--p", "1.1", "--p", "100",
      "--resolutions", "3"], 3),
    (["counterexample", "--preset", "mild-cusp", "--ladder", "16,32"], 2),
    (["embed", *UNIT, "--p", "4", "--ladder", "4", "--u", "x1", "--pairs", "exhaustive"], 0),
    (["expr-eval", "--expr", "2+3*4"], 2),
    (["app"], 2),
])
def test_exit_status_matrix(argv, status, capsys):
    assert call(argv, capsys)[0] == status


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["beta", "--pairs", "sometimes"])
    assert exc.value.code == 2


def test_expr_eval(capsys):
    code, out, _ = call(["expr-eval", "--expr", "2^3^2", "--at", "0"], capsys)
    assert code == 0 and json.loads(out)["value"] == 512.0
    code, out, _ = call(["expr-eval", "--expr", "x + y", "--predicate", "x < y",
                         "--at", "1,2"], capsys)
    d = json.loads(out)
    assert d["value"] == 3.0 and d["holds"] is True


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# beta run\nbox = 0:1,0:1\np = 4\np = 8\nresolutions = 4\n")
    code, out, _ = call(["beta", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["config"]["p"] == ["4", "8"]
    code, out, _ = call(["beta", "--config", str(cfg), "--p", "10"], capsys)
    d = json.loads(out)
    assert d["config"]["p"] == ["10"] and d["beta"]["min"] == [0.8, 0.8]
    cfg.write_text("bogus = 1\n")
    assert call(["beta", "--config", str(cfg)], capsys)[0] == 2


def test_config_round_trip():
    text = ("subcommand = counterexample\npreset = pronounced-cusp\nalpha = 2.5\n"
            "ladder = 16,32,64\nseed = 3\np = 2 + x1\np = 3\nallow_hypothesis_violation = true\n")
    cfg = RunConfig.from_text(text)
    again = RunConfig.from_text(cfg.to_text())
    assert again == cfg and again.alpha == 2.5 and again.p == ["2 + x1", "3"]


def test_counterexample_csv(tmp_path, capsys):
    path = tmp_path / "ce.csv"
    code, out, _ = call(["counterexample", "--preset", "pronounced-cusp", "--ladder", "8,12,16",
                         "--csv", str(path)], capsys)
    assert code == 0
    d = json.loads(out)
    assert len(d["growth_factors"]) == 2 and d["header"]["seed"] == 0
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["level", "resolution", "max_quotient", "growth_factor", "sobolev_norm",
                       "argmax_distance_to_cusp"]
    assert len(rows) == 4 and rows[1][3] == ""


def test_embed_csv_and_threads_env(tmp_path, monkeypatch):
    argv = ["embed", *POROUS, "--ladder", "16,24", "--count", "3", "--seed", "2",
            "--budget", "5000", "--format", "csv"]
    outs = []
    for t in ("1", "8"):
        monkeypatch.setenv("HOLDERLAB_THREADS", t)
        buf = io.StringIO()
        from holderlab.cli import _config_from_args, _parser
        assert run(_config_from_args(_parser().parse_args(argv)), stdout=buf) == 0
        outs.append(buf.getvalue())
    assert outs[0] == outs[1]
    rows = list(csv.reader(io.StringIO(outs[0])))
    assert rows[0] == ["level", "resolution", "function", "sobolev", "hoelder", "ratio"]
    assert len(rows) == 7


def test_module_entry_point(tmp_path):
    out = tmp_path / "b.json"
    r = subprocess.run([sys.executable, "-m", "holderlab", "beta", *UNIT, "--p", "4",
                        "--resolutions", "4", "--out", str(out)], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(out.read_text())["beta"]["min"] == [0.5, 0.5]
