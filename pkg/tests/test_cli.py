import math
import subprocess
import sys
from fractions import Fraction

import pytest

from plateau_ea.cli import main, parse_grid, parse_operator, parse_start
from plateau_ea.mutation import HyperHeuristicPolicy, OperatorSpec


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    rows = [l.split(",") for l in lines[1:]]
    footer = dict(
        l[2:].split("=", 1) for l in text.splitlines() if l.startswith("# ")
    )
    return header, rows, footer


def cell(header, row, name):
    return row[header.index(name)]


def test_parse_operator():
    assert parse_operator("rls").kind == "rls"
    assert parse_operator("2bit").kind == "two_bit"
    assert parse_operator("stdbit:1.5").gamma == Fraction(3, 2)
    assert parse_operator("fastga:2").beta == 2.0
    assert parse_operator("hh:simple-random") == HyperHeuristicPolicy("simple_random")
    for bad in ("wat", "stdbit:", "hh:unknown"):
        with pytest.raises(Exception):
            parse_operator(bad)


def test_parse_start_and_grid():
    assert parse_start("plateau").kind == "plateau"
    assert parse_start("level:1").level == 1
    assert parse_start("string:101").bits.to01() == "101"
    assert parse_grid("1,2,3") == [1, 2, 3]
    assert parse_grid("0:10:5") == [0, 5, 10]


def test_chain_rational_worked_example(capsys):
    code, out, _ = run_cli(
        ["chain", "--n", "10", "--k", "2", "--op", "rls", "--mode", "rational"], capsys
    )
    assert code == 0
    header, rows, footer = read_csv(out)
    row = rows[0]
    assert cell(header, row, "ET_0") == "60"
    assert cell(header, row, "ET_1") == "55"
    assert cell(header, row, "p_0_0") == "4/5"  # lowest terms
    assert cell(header, row, "p_0_1") == "1/5"
    assert cell(header, row, "exit_1") == "1/10"
    assert footer["mode"] == "rational"
    assert footer["version"] == "0.1.0"
    # row sums equal 1 - exit
    for i in (0, 1):
        s = Fraction(cell(header, row, f"rowsum_{i}"))
        e = Fraction(cell(header, row, f"exit_{i}"))
        assert s == 1 - e


def test_chain_deterministic_output(capsys):
    args = ["chain", "--n", "10,12", "--k", "2", "--op", "rls", "--op", "stdbit:1"]
    code1, out1, _ = run_cli(args, capsys)
    code2, out2, _ = run_cli(args, capsys)
    assert code1 == code2 == 0
    assert out1 == out2


def test_theory_table1(capsys):
    code, out, _ = run_cli(["theory", "--table1"], capsys)
    assert code == 0
    header, rows, _ = read_csv(out)
    assert header == ["operator", "k=2", "k=4", "k=6"]
    assert len(rows) == 7
    table = {r[0]: [float(v) for v in r[1:]] for r in rows}
    assert table["rls"] == [1.0, 1.0, 1.0]
    assert table["hh simple-random"] == [1.0, 1.0, 1.0]
    assert abs(table["stdbit gamma=1"][0] - 1.812) < 1e-3
    assert abs(table["fastga beta=2"][1] - 1.155) < 1e-3


def test_theory_optimal_rate(capsys):
    code, out, _ = run_cli(["theory", "--optimal-rate", "--k", "4"], capsys)
    assert code == 0
    header, rows, _ = read_csv(out)
    assert abs(float(rows[0][1]) - 2.2134) < 1e-4


def test_theory_prediction_rows(capsys):
    code, out, _ = run_cli(
        ["theory", "--op", "rls", "--op", "hh:greedy", "--k", "2", "--n", "100"], capsys
    )
    assert code == 0
    header, rows, _ = read_csv(out)
    byop = {r[0]: r for r in rows}
    assert float(cell(header, byop["rls"], "leading_constant")) == 1.0
    assert float(cell(header, byop["rls"], "asymptotic_ET")) == 5000.0
    assert cell(header, byop["hh:greedy"], "leading_constant") == ""  # no predictor


def test_simulate_exact_column_and_zscore(capsys):
    code, out, _ = run_cli(
        ["simulate", "--n", "20", "--k", "2", "--op", "rls", "--trials", "4000",
         "--seed", "11", "--start", "plateau"],
        capsys,
    )
    assert code == 0
    header, rows, footer = read_csv(out)
    z = float(cell(header, rows[0], "z"))
    assert abs(z) <= 3.0
    assert footer["seed"] == "11"
    exact = float(cell(header, rows[0], "exact_ET"))
    # plateau-uniform absorption for pure one-bit flips at n=20
    want = (190 * 220 + 20 * 210) / 210  # sum_i C(n,2-i) t_i / N
    assert exact == pytest.approx(want, rel=1e-12)


def test_simulate_start_optimum_mean_zero(capsys):
    code, out, _ = run_cli(
        ["simulate", "--n", "10", "--k", "2", "--op", "rls", "--trials", "50",
         "--start", "level:2"],
        capsys,
    )
    assert code == 0
    header, rows, _ = read_csv(out)
    assert float(cell(header, rows[0], "mean")) == 0.0
    assert float(cell(header, rows[0], "exact_ET")) == 0.0


@pytest.mark.filterwarnings("ignore::plateau_ea.mutation.ZeroOneFlipWarning")
def test_simulate_parity_trapped_operator(capsys):
    # pure two-bit flips cannot leave level 1 at k=2: every run caps out,
    # the exact column stays blank, and the command still succeeds
    code, out, _ = run_cli(
        ["simulate", "--n", "10", "--k", "2", "--op", "2bit", "--trials", "20",
         "--tmax", "500", "--start", "level:1"],
        capsys,
    )
    assert code == 0
    header, rows, _ = read_csv(out)
    assert cell(header, rows[0], "exact_ET") == ""
    assert float(cell(header, rows[0], "failure_fraction")) == 1.0
    assert float(cell(header, rows[0], "mean")) == 500.0


def test_simulate_reruns_identical(capsys):
    args = ["simulate", "--n", "15", "--k", "2", "--op", "hh:random-gradient",
            "--trials", "500", "--seed", "7"]
    _, out1, _ = run_cli(args, capsys)
    _, out2, _ = run_cli(args, capsys)
    assert out1 == out2


def test_tail_csv_contract(capsys):
    code, out, _ = run_cli(
        ["tail", "--n", "30", "--k", "2", "--op", "rls", "--tmax", "400",
         "--grid", "0:400:100"],
        capsys,
    )
    assert code == 0
    header, rows, _ = read_csv(out)
    assert float(cell(header, rows[0], "exact")) == 1.0
    for row in rows:
        ex = float(cell(header, row, "exact"))
        main_term = float(cell(header, row, "main"))
        env = float(cell(header, row, "envelope"))
        # generous float-level check; the rigorous one is --check-envelope
        assert abs(ex - main_term) <= env + 1e-10
    vals = [float(cell(header, r, "exact")) for r in rows]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_tail_check_envelope(capsys):
    code, out, _ = run_cli(
        ["tail", "--n", "30", "--k", "2", "--op", "rls", "--tmax", "600",
         "--grid", "0,300,600", "--check-envelope"],
        capsys,
    )
    assert code == 0
    _, _, footer = read_csv(out)
    assert footer["envelope_holds"] == "True"
    assert float(footer["envelope_min_slack"]) >= 0


def test_tail_empirical_within_3_sigma(capsys):
    code, out, _ = run_cli(
        ["tail", "--n", "30", "--k", "2", "--op", "rls", "--tmax", "600",
         "--grid", "0,200,400", "--trials", "4000", "--seed", "5"],
        capsys,
    )
    assert code == 0
    header, rows, _ = read_csv(out)
    for row in rows:
        ex = float(cell(header, row, "exact"))
        emp = float(cell(header, row, "empirical"))
        sig = float(cell(header, row, "empirical_sigma"))
        assert abs(emp - ex) <= 3 * max(sig, 1e-9)
        lo = float(cell(header, row, "ci95_lo"))
        hi = float(cell(header, row, "ci95_hi"))
        assert lo <= emp <= hi


def test_compare_ratio_trend(capsys):
    code, out, _ = run_cli(
        ["compare", "--n", "25,50,100", "--k", "2", "--op", "rls"], capsys
    )
    assert code == 0
    header, rows, _ = read_csv(out)
    ratios = [float(cell(header, r, "ratio")) for r in rows]
    assert all(r > 1 for r in ratios)
    assert ratios[0] > ratios[1] > ratios[2]
    for r in rows:
        gap = float(cell(header, r, "gap"))
        eps = float(cell(header, r, "eps"))
        assert gap >= eps


def test_validate_passes(capsys):
    code, out, _ = run_cli(["validate", "--fast"], capsys)
    assert code == 0
    assert "FAIL" not in out
    assert "exact" in out  # rational checks report exactness


def test_validate_inject_fault_fails(capsys):
    code, out, _ = run_cli(["validate", "--fast", "--inject-fault"], capsys)
    assert code == 2
    assert "FAIL detailed balance (float residual)" in out


def test_usage_errors_exit_1(capsys):
    code, _, err = run_cli(["chain", "--op", "bogus"], capsys)
    assert code == 1
    assert "error" in err
    code, _, err = run_cli(["simulate", "--n", "x"], capsys)
    assert code == 1
    code, _, err = run_cli(["chain", "--n", "10", "--k", "5", "--op", "rls"], capsys)
    assert code == 1  # 2k >= n rejected with message


def test_config_file_section(tmp_path, capsys):
    cfgfile = tmp_path / "exp.ini"
    cfgfile.write_text("[chain]\nn = 10\nk = 2\nop = rls\nmode = rational\n")
    code, out, _ = run_cli(["chain", "--config", str(cfgfile)], capsys)
    assert code == 0
    header, rows, footer = read_csv(out)
    assert footer["mode"] == "rational"
    assert cell(header, rows[0], "ET_0") == "60"
    # explicit flag overrides the file
    code, out, _ = run_cli(["chain", "--config", str(cfgfile), "--mode", "float"], capsys)
    header, rows, footer = read_csv(out)
    assert footer["mode"] == "float"
    code, _, _ = run_cli(["chain", "--config", str(tmp_path / "none.ini")], capsys)
    assert code == 1


def test_out_file_written(tmp_path, capsys):
    dest = tmp_path / "t.csv"
    code, out, _ = run_cli(["theory", "--table1", "--out", str(dest)], capsys)
    assert code == 0
    assert out == ""
    text = dest.read_text()
    assert text.startswith("operator,")
    assert "# version=0.1.0" in text


def test_console_entry_point():
    for module in ("plateau_ea.cli", "plateau_ea"):
        proc = subprocess.run(
            [sys.executable, "-m", module, "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "0.1.0" in proc.stdout


def test_chain_dump_file(tmp_path, capsys):
    dump = tmp_path / "chains.txt"
    code, _, _ = run_cli(
        ["chain", "--n", "10", "--k", "2", "--op", "rls", "--mode", "rational",
         "--dump", str(dump), "--out", str(tmp_path / "c.csv")],
        capsys,
    )
    assert code == 0
    text = dump.read_text()
    assert "# level chain n=10 k=2 mode=rational" in text
    assert "P 4/5 1/5" in text
    assert "exit 0 1/10" in text
