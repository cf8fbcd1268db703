import re

import pytest

from solovay_bench.cli import main
from solovay_bench.scenario import (
    ScenarioError,
    bundled_scenarios,
    csv_text,
    emit_csv,
    load_scenario,
    run_scenario,
)

HEADER = """
[scenario]
name = tiny

[budget]
fuel = 5000
depth = 6

[real alpha]
kind = exact
value = 1/4

[real beta]
kind = exact
value = 1/2
"""

HALF = """
[witness half]
kind = affine
p = 0
s = 1/2
"""


def write(tmp_path, body, name="tiny.ini"):
    p = tmp_path / name
    p.write_text(HEADER + body, encoding="utf-8")
    return p


def test_bundled_scenarios_present():
    names = {p.stem for p in bundled_scenarios()}
    assert {"prop4-separation", "least-degree", "q2r-roundtrip", "transformer",
            "extraction", "pipeline-claims"} <= names


def test_passing_scenario(tmp_path):
    p = write(tmp_path, HALF + """
[task solovay]
op = check-solovay
witness = half
alpha = alpha
beta = beta
""")
    rep = run_scenario(p)
    assert rep.exit_code == 0
    assert rep.render().endswith("result pass exit=0\n")


def test_expect_fail_inverts_but_keeps_counterexample(tmp_path):
    p = write(tmp_path, """
[witness zero]
kind = affine
p = 0
s = 0

[task solovay]
op = check-solovay
witness = zero
alpha = alpha
beta = beta
expect = fail
""")
    rep = run_scenario(p)
    assert rep.exit_code == 0
    text = rep.render()
    assert "verdict=pass actual=fail expect=fail" in text
    assert "first=q=" in text


def test_failing_scenario_exit_code(tmp_path):
    p = write(tmp_path, """
[witness zero]
kind = affine
p = 0
s = 0

[task solovay]
op = check-solovay
witness = zero
alpha = alpha
beta = beta
""")
    assert run_scenario(p).exit_code == 1


def test_exhaustion_is_inconclusive(tmp_path):
    p = write(tmp_path, """
[real b]
kind = geometric
target = 1/2

[real a]
kind = geometric
target = 1/4

[witness f]
kind = pl-r
alpha = a
beta = b

[task back]
op = extract
witness = f
stream = a
direction = backward
length = 8
fuel = 40
""")
    rep = run_scenario(p)
    assert rep.exit_code == 2
    assert "exhausted=1" in rep.render()


def test_unresolved_reference_has_location(tmp_path):
    p = write(tmp_path, """
[task solovay]
op = check-solovay
witness = missing
alpha = alpha
beta = beta
""")
    with pytest.raises(ScenarioError, match=r"\[task solovay\]"):
        run_scenario(p)


def test_unknown_section(tmp_path):
    p = write(tmp_path, "\n[gadget x]\nkind = exact\n")
    with pytest.raises(ScenarioError, match="unexpected section"):
        load_scenario(p)


def test_cycle_rejected(tmp_path):
    p = write(tmp_path, HALF + """
[task one]
op = check-monotone
witness = half
after = two

[task two]
op = check-monotone
witness = half
after = one
""")
    with pytest.raises(ScenarioError, match="cycle"):
        load_scenario(p)


def test_budget_must_be_consistent(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[budget]\nfuel = 2\ndepth = 8\n", encoding="utf-8")
    with pytest.raises(ScenarioError, match="budget"):
        load_scenario(p)


def test_task_filter_pulls_dependencies(tmp_path):
    p = write(tmp_path, HALF + """
[task first]
op = check-monotone
witness = half

[task second]
op = check-monotone
witness = half
after = first

[task other]
op = check-lipschitz
witness = half
d = 1
""")
    rep = run_scenario(p, task_filter=lambda t: t == "second")
    assert rep.order == ["first", "second"]


def test_csv_format():
    text = csv_text(["n", "value"], [["0", "1/2"], ["1", "3/4"]])
    assert text == "n,value\n0,1/2\n1,3/4\n"


def test_emit_csv_unknown_task(tmp_path):
    rep = run_scenario(write(tmp_path, HALF + "\n[task m]\nop = check-monotone\nwitness = half\n"))
    with pytest.raises(ScenarioError):
        emit_csv(rep, "nope", tmp_path)


def test_separation_tables(tmp_path):
    rep = run_scenario(next(p for p in bundled_scenarios() if p.stem == "prop4-separation"))
    files = emit_csv(rep, "instance", tmp_path)
    data = files[0].read_bytes()
    assert b"\r" not in data and data.endswith(b"\n")
    assert b"/" in data.splitlines()[1]


class TestCli:
    def test_list(self, capsys):
        assert main(["--list"]) == 0
        assert "q2r-roundtrip" in capsys.readouterr().out

    def test_missing_scenario_argument(self, capsys):
        assert main([]) == 2

    def test_unknown_scenario(self, capsys):
        assert main(["no-such-scenario"]) == 2
        assert "no scenario" in capsys.readouterr().err

    def test_bundled_by_name_with_outputs(self, tmp_path, capsys):
        assert main(["transformer", "--csv-dir", str(tmp_path)]) == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert "transformer.report.txt" in names
        assert any(n.startswith("transformer.total.") for n in names)

    def test_env_overrides_csv_dir(self, tmp_path, monkeypatch, capsys):
        env_dir, flag_dir = tmp_path / "env", tmp_path / "flag"
        monkeypatch.setenv("SOLOVAY_BENCH_OUTDIR", str(env_dir))
        assert main(["least-degree", "--csv-dir", str(flag_dir)]) == 0
        assert (env_dir / "least-degree.report.txt").exists()
        assert not flag_dir.exists()

    def test_task_filter_flag(self, tmp_path, capsys):
        assert main(["prop4-separation", "--task", "inst*"]) == 0
        out = capsys.readouterr().out
        assert "task instance" in out and "task monotone" not in out

    def test_expected_failure_exit_code(self, capsys):
        assert main(["pipeline-claims"]) == 1

    def test_timings_go_to_stderr(self, capsys):
        main(["least-degree", "--timings"])
        cap = capsys.readouterr()
        timing = re.compile(r"\d+\.\d{3}s$", re.M)
        assert timing.search(cap.err) and not timing.search(cap.out)


def bundled(name):
    return next(p for p in bundled_scenarios() if p.stem == name)


def test_separation_scenario_expected_failure():
    rep = run_scenario(bundled("prop4-separation"))
    assert rep.exit_code == 0
    assert rep.tasks["solovay"].actual.value == "pass"
    mono = rep.tasks["monotone"]
    assert mono.expect_fail and mono.actual.value == "fail"
    assert mono.checks[0].violations


def test_least_degree_scenario_passes():
    assert run_scenario(bundled("least-degree")).exit_code == 0


def test_round_trip_scenario_passes_at_depth_8():
    rep = run_scenario(bundled("q2r-roundtrip"), {"depth": 8})
    assert rep.exit_code == 0, rep.render()
