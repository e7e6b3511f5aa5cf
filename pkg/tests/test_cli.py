import pytest

from widthforge.cli import main
from widthforge.cnf import FunctionSpec, is_clausal_encoding, parse_dimacs
from widthforge.dnnf import dnnf_function, read_sdnnf, write_sdnnf
from widthforge.gadgets import amo_function
from widthforge.treewidth import read_td


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ladder(tmp_path, capsys):
    code, out, _ = run(capsys, "gadget", "amo-ladder", 4, "-o", tmp_path / "l4")
    assert code == 0
    return tmp_path / "l4"


def test_gadget_writes_formula_witness_and_spec(ladder):
    for suffix in (".cnf", ".td", ".spec"):
        assert (ladder.parent / (ladder.name + suffix)).exists()
    F = parse_dimacs((ladder.parent / "l4.cnf").read_text())
    spec = FunctionSpec.from_text((ladder.parent / "l4.spec").read_text())
    assert spec == amo_function(4)
    assert is_clausal_encoding(F, spec)


def test_verify_accepts_gadget_witnesses(ladder, capsys):
    d = ladder.parent
    code, out, _ = run(capsys, "verify", d / "l4.cnf", "--td", d / "l4.td", "--spec", d / "l4.spec")
    assert code == 0
    assert "primal decomposition of width 2 (special)" in out
    assert "clausal encoding" in out


def test_analyze_writes_four_witnesses(ladder, capsys):
    d = ladder.parent
    code, out, err = run(capsys, "analyze", d / "l4.cnf", "--format", "tsv")
    assert code == 0
    assert out.splitlines()[0] == "measure\tvalue\ttag"
    assert "tw_p\t2\texact" in out
    for name in ("tw_p", "tw_d", "tw_i", "mtw"):
        path = d / f"l4.{name}.td"
        assert path.exists()
        code, vout, _ = run(capsys, "verify", d / "l4.cnf", "--td", path)
        assert code == 0, vout


def test_compile_then_verify_and_reencode(ladder, capsys):
    d = ladder.parent
    code, out, _ = run(capsys, "compile", d / "l4.cnf", "--exact-td")
    assert code == 0 and "circuit width" in out
    D = read_sdnnf((d / "l4.sdnnf").read_text())
    assert dnnf_function(D).count == 4 + 1
    code, out, _ = run(capsys, "verify", d / "l4.cnf", "--sdnnf", d / "l4.sdnnf")
    assert code == 0
    code, out, _ = run(capsys, "reencode", d / "l4.cnf", "--target", "scw")
    assert code == 0
    code, out, _ = run(capsys, "verify", d / "l4.scw.cnf", "--cwx", d / "l4.scw.cwx", "--spec", d / "l4.spec",
                       "--td", d / "l4.scw.primal.td")
    assert code == 0, out
    assert "signed expression" in out
    # the input formula is left alone
    assert parse_dimacs((d / "l4.cnf").read_text()).num_vars == 9


def test_reencode_cw_target(tmp_path, capsys):
    code, _, _ = run(capsys, "gadget", "grid", 2, 3, "-o", tmp_path / "g")
    assert code == 0
    code, out, _ = run(capsys, "reencode", tmp_path / "g.cnf", "--target", "cw")
    assert code == 0 and "labels" in out
    code, out, _ = run(capsys, "verify", tmp_path / "g.cw.cnf", "--cwx", tmp_path / "g.cw.cwx",
                       "--td", tmp_path / "g.cw.modular.td")
    assert code == 0, out
    assert "modular decomposition" in out


def test_verify_reports_uncovered_edge(ladder, capsys):
    d = ladder.parent
    T = read_td((d / "l4.td").read_text())
    text = (d / "l4.td").read_text().splitlines()
    # drop one vertex from the first bag line
    i = next(j for j, line in enumerate(text) if line.startswith("b "))
    text[i] = " ".join(text[i].split()[:-1])
    (d / "bad.td").write_text("\n".join(text) + "\n")
    code, out, _ = run(capsys, "verify", d / "l4.cnf", "--td", d / "bad.td")
    assert code == 1
    assert "FAIL" in out and "not covered" in out
    assert T.width == 2


def test_verify_label_arity_exit_code(tmp_path, capsys):
    run(capsys, "gadget", "example", "-o", tmp_path / "ex")
    run(capsys, "reencode", tmp_path / "ex.cnf", "--target", "scw")
    cwx = (tmp_path / "ex.scw.cwx").read_text().splitlines()
    cwx[0] = "p cwx 1"
    (tmp_path / "low.cwx").write_text("\n".join(cwx) + "\n")
    code, out, _ = run(capsys, "verify", tmp_path / "ex.scw.cnf", "--cwx", tmp_path / "low.cwx")
    assert code == 2
    assert "declares 1" in out


def test_cc_subcommand(capsys, fig_dnnf, tmp_path):
    code, out, _ = run(capsys, "cc", "eq:2", "--partition", "1,2|3,4")
    assert code == 0 and "s_min=4" in out
    code, out, _ = run(capsys, "cc", "eq:2", "--best")
    assert "best" in out and "s_min=1" in out
    (tmp_path / "fig.sdnnf").write_text(write_sdnnf(fig_dnnf))
    (tmp_path / "fig.spec").write_text(dnnf_function(fig_dnnf).to_text())
    code, out, _ = run(capsys, "cc", tmp_path / "fig.spec", "--audit", tmp_path / "fig.sdnnf")
    assert code == 0
    assert out.count("cut\t") == 5 and "VIOLATION" not in out


def test_errors_are_reported_not_raised(tmp_path, capsys):
    code, _, err = run(capsys, "analyze", tmp_path / "missing.cnf")
    assert code == 1 and err.startswith("error: cannot read")
    (tmp_path / "bad.cnf").write_text("p cnf 1 1\n2 0\n")
    code, _, err = run(capsys, "analyze", tmp_path / "bad.cnf")
    assert code == 1 and "error:" in err
    code, _, err = run(capsys, "gadget", "card", 3)
    assert code == 1 and "parameter" in err
    code, _, err = run(capsys, "cc", "nosuch:3")
    assert code == 1


def test_sweep_is_deterministic(tmp_path, capsys):
    code, first, _ = run(capsys, "sweep", "cc", "-o", tmp_path / "a.txt")
    assert code == 0
    code, second, _ = run(capsys, "sweep", "cc")
    assert first == second == (tmp_path / "a.txt").read_text()
    assert first.startswith("suite cc seed 0\nPASS C9")
