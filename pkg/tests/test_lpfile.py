from importlib import resources

import numpy as np
import pytest

from stlsynth.encoder import EncoderConfig, encode
from stlsynth.model import MilpModel
from stlsynth.parser import RegionDef, parse
from stlsynth.solver.lpfile import (
    LpFormatError, SolutionFileError, export_lp, import_solution, lp_text, read_lp, read_solution,
    write_solution,
)
from stlsynth.solver.solve import OPTIMAL, VerificationError, branch_and_bound, verify
from stlsynth.system import double_integrator

SYS = double_integrator()
REGIONS = {"A": RegionDef.box("A", 1.5, 3.0, 0.0, 2.5)}


def example_model(Q=None):
    f = parse("F[0,4] in(A)", REGIONS)
    return encode(f, SYS, [1, 1, 0, 0], 4, EncoderConfig(rho_max=0.5), Q=Q)


def golden(name):
    return resources.files("stlsynth.data").joinpath(name)


def test_empty_model():
    assert lp_text(MilpModel()) == "\\ stlsynth model\nMinimize\n obj:\nEnd\n"


def test_single_binary_listed():
    m = MilpModel()
    m.add_binary("flag")
    text = lp_text(m)
    assert text.endswith("Binaries\n flag\nEnd\n")


def test_export_matches_golden_file(tmp_path):
    model, _ = example_model()
    path = export_lp(model, tmp_path / "m.lp")
    assert path.read_bytes() == golden("example.lp").read_bytes()


def test_export_twice_is_byte_identical(tmp_path):
    m1, _ = example_model()
    m2, _ = example_model()
    a, b = export_lp(m1, tmp_path / "a.lp"), export_lp(m2, tmp_path / "b.lp")
    assert a.read_bytes() == b.read_bytes()


def test_binaries_section_length_matches_stats():
    model, stats = example_model()
    lines = lp_text(model).splitlines()
    section = lines[lines.index("Binaries") + 1: lines.index("End")]
    assert len(section) == stats.binary_count


@pytest.mark.parametrize("Q", [None, [1.0, 0.5, 0.0, 0.0]])
def test_read_back_reproduces_text(tmp_path, Q):
    model, _ = example_model(Q)
    path = export_lp(model, tmp_path / "m.lp")
    again = read_lp(path)
    assert lp_text(again) == lp_text(model)
    assert again.quadratic == model.quadratic


def test_long_rows_wrap_and_read_back(tmp_path):
    m = MilpModel()
    ids = [m.add_var(f"v{i}", -1.5, 2.0) for i in range(15)]
    m.add_constraint({i: float(i) - 7.0 for i in ids}, ">=", -3.25, "wide")
    m.set_objective({i: 0.1 * i for i in ids}, constant=-2.0)
    text = lp_text(m)
    assert any(line.startswith("   ") for line in text.splitlines())
    path = tmp_path / "w.lp"
    path.write_text(text)
    assert lp_text(read_lp(path)) == text


def test_bad_lp_text(tmp_path):
    path = tmp_path / "bad.lp"
    path.write_text("\\ x\nMinimize\n obj: + x\nBounds\n x between 1 and 2\nEnd\n")
    with pytest.raises(LpFormatError):
        read_lp(path)


def test_golden_solution_imports_and_verifies():
    model, stats = example_model()
    res = import_solution(model, golden("example.sol"), stats)
    assert res.status == OPTIMAL and res.rho == pytest.approx(0.5)
    assert res.verification.ok and res.verification.oracle_rho >= 0.5 - 1e-6


def test_own_solution_round_trip(tmp_path):
    model, stats = example_model()
    res = branch_and_bound(model, stats=stats)
    x = np.array([res.values[v.name] for v in model.variables])
    path = write_solution(model, x, tmp_path / "s.sol", res.status)
    back = import_solution(model, path, stats)
    assert back.verification == res.verification
    assert back.objective == res.objective


def test_tampered_output_names_the_dynamics_row(tmp_path):
    model, _ = example_model()
    res = branch_and_bound(model)
    x = np.array([res.values[v.name] for v in model.variables])
    x[model.var("y_2_0")] += 0.3
    path = write_solution(model, x, tmp_path / "t.sol")
    with pytest.raises(VerificationError) as info:
        import_solution(model, path)
    assert "dynamics row out_2_0" in str(info.value)
    assert not verify(model, x).ok


@pytest.mark.parametrize("body, msg", [
    ("nosuchvar 1\n", "unknown variable"),
    ("rho 1 2\n", "expected"),
    ("rho abc\n", "bad value"),
    ("rho 0.5\n", "no value"),
])
def test_solution_file_errors(tmp_path, body, msg):
    model, _ = example_model()
    path = tmp_path / "s.sol"
    path.write_text(body)
    with pytest.raises(SolutionFileError, match=msg):
        read_solution(model, path)


def test_external_solver_solution_is_sound(tmp_path):
    highspy = pytest.importorskip("highspy")
    model, stats = example_model()
    lp_path = export_lp(model, tmp_path / "m.lp")
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(lp_path))
    h.run()
    lp = h.getLp()
    values = dict(zip(lp.col_names_, h.getSolution().col_value))
    sol = tmp_path / "ext.sol"
    sol.write_text("".join(f"{v.name} {values[v.name]!r}\n" for v in model.variables))
    res = import_solution(model, sol, stats)
    assert res.verification.oracle_rho >= -1e-6
    assert res.objective == pytest.approx(-0.5, abs=1e-6)
