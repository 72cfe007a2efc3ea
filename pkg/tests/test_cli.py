import io
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout

from leadsupply import cli
from leadsupply.ingest import fixture_path


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        try:
            code = cli.main(list(argv))
        except SystemExit as exc:
            code = exc.code
    return code, out.getvalue(), err.getvalue()


def test_validate_fixture():
    code, out, _ = run("validate", "fixture:751plus")
    assert code == 0
    assert out == "fixture:751plus: ok (751plus, 2021, total 154687, with flows)\n"


def test_validate_corrupt_file(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(fixture_path("751plus").read_text().replace(",,8475", ",,-8475", 1))
    code, out, _ = run("validate", str(bad))
    assert code == 1
    assert out.startswith(f"{bad}:6: negative headcount")


def test_missing_file_is_data_error(tmp_path):
    code, _, err = run("gap", str(tmp_path / "nope.csv"))
    assert code == 1 and "error" in err


def test_usage_errors_exit_2():
    assert run()[0] == 2
    assert run("gap")[0] == 2
    assert run("pool", "--pool-size", "4", "--share", "0.3", "--pools", "5", "--probs", "1=0")[0] == 2
    assert run("pool", "--share", "0.3")[0] == 2
    assert run("--jobs", "0", "gap", "fixture:751plus")[0] == 2


def test_gap_summary_lines(tmp_path):
    code, out, _ = run("gap", "fixture:751plus", "--view", "all", "--out", str(tmp_path))
    assert code == 0
    assert out.splitlines() == [
        "751plus all r30=1.53 surplus",
        "751plus white_female r30=-0.40 shortage",
        "751plus minority r30=-0.61 shortage",
    ]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["751plus-all-chart.svg", "751plus-all-table.txt"]


def test_gap_single_view_and_precision():
    code, out, _ = run("gap", "fixture:501-750", "--view", "white_female", "--precision", "1")
    assert (code, out) == (0, "501-750 white_female r30=-0.275 shortage\n")
    code, out, _ = run("gap", "fixture:501-750", "--view", "minority", "--epsilon", "0.9")
    assert out == "501-750 minority r30=-0.57 equilibrium\n"


def test_global_flags_after_subcommand():
    assert run("gap", "fixture:251-500", "--precision", "1")[1] == run("--precision", "1", "gap", "fixture:251-500")[1]


def test_project_defaults_never_feasible(tmp_path):
    code, out, _ = run("project", "fixture:751plus", "--years", "5", "--out", str(tmp_path))
    assert (code, out) == (0, "feasible_at=never\n")
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["751plus-minority-projection.csv", "751plus-minority-projection.svg"]
    assert len((tmp_path / names[0]).read_text().splitlines()) == 7


def test_project_trivially_feasible_scenario(tmp_path):
    sc = tmp_path / "sc.csv"
    sc.write_text(
        "#label: flood\nrecord,level,gender,race,kind,value\n"
        "multiplier,,,minority,attrition,3\nmultiplier,,,minority,promotion,3\n"
    )
    code, out, _ = run("project", "fixture:751plus", "--scenario", str(sc), "--years", "1")
    assert (code, out) == (0, "feasible_at=0\n")


def test_invalid_scenario_file(tmp_path):
    sc = tmp_path / "sc.csv"
    sc.write_text("#years: 0\nrecord,level,gender,race,kind,value\n")
    code, _, err = run("project", "fixture:751plus", "--scenario", str(sc))
    assert code == 1 and str(sc) in err


def test_absolute_projection_reports_infeasible_year():
    code, _, err = run("project", "fixture:751plus", "--scaling", "absolute")
    assert code == 1 and "year 9" in err


def test_pool_matches_published_example():
    code, out, _ = run("pool", "--pool-size", "4", "--share", "0.3", "--pools", "5", "--probs", "1:0,2:0.5")
    assert code == 0
    assert out == "exact=0.100\nmonte_carlo=0.1003 ± 0.0003 (trials=1000000, seed=42)\ngap=-0.200\n"


def test_pool_policy_file_with_override(tmp_path):
    pol = tmp_path / "pol.csv"
    pol.write_text("#pool_size: 4\n#share: 0.3\n#pools: 5\n#probs: hbr-2016\nrecord,level,gender,race,kind,value\n")
    code, out, _ = run("pool", "--policy", str(pol), "--trials", "1000")
    assert code == 0 and out.startswith("exact=0.100\n")
    code, out, _ = run("pool", "--policy", str(pol), "--share", "0.5", "--trials", "1000")
    assert out.startswith("exact=0.500\n")


def test_report_writes_every_artifact(tmp_path):
    code, out, _ = run("report", "fixture:751plus", "fixture:251-500", "--out", str(tmp_path))
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert len(out.splitlines()) == len(names) == 2 * 9 + 1
    assert "combined-all-demographics.txt" in names
    assert "251-500-minority-chart.svg" in names


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "leadsupply", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "gap" in proc.stdout
