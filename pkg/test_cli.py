"""
Tests for the batch command line
"""
import json
from pathlib import Path

from cli import main
from mf import mf_koszul_pair, mf_tensor, mf_validate, parse_mf
from polyring import Ring
from reduce import parse_trace
from scenario import line_scenario, sample_modules, unit_kernel
from utils import format_object

XY = Ring(("x", "y"), (1, 1))


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(format_object(obj), encoding="utf-8")
    return str(path)


def test_validate_good_file(tmp_path, capsys):
    path = _write(tmp_path, "k.mf", mf_koszul_pair(XY, "x", "y", 0))
    assert main(["validate", path]) == 0
    assert capsys.readouterr().out == "ok\n"


def test_validate_bad_factorization(tmp_path, capsys):
    path = tmp_path / "bad.mf"
    path.write_text("ring: x y\npotential: x*y\nd_minus1:\n1 1\n0 0 : x\nd_zero:\n1 1\n0 0 : x\n")
    assert main(["validate", str(path)]) == 1
    assert "failed" in capsys.readouterr().err


def test_unreadable_input_exits_with_two(tmp_path):
    path = tmp_path / "garbage.mf"
    path.write_text("ring: x\npotential: x +\n")
    assert main(["validate", str(path)]) == 2
    assert main(["validate", str(tmp_path / "missing.mf")]) == 2


def test_check_potentials(capsys):
    assert main(["check-potentials", "line"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("w: ")
    assert out.endswith("ok\n")


def test_tensor_as_json(tmp_path):
    left = _write(tmp_path, "a.mf", mf_koszul_pair(XY, "x", "y", 0))
    right = _write(tmp_path, "b.mf", mf_koszul_pair(XY, "x", "x", 0))
    out = tmp_path / "t.json"
    assert main(["tensor", left, right, "--format", "json", "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["type"] == "mf"
    assert data["potential"] == "x^2 + x*y"


def test_act_with_unit_kernel(tmp_path):
    s = line_scenario()
    kernel = _write(tmp_path, "unit.mf", unit_kernel(s))
    module = _write(tmp_path, "m.mf", sample_modules(s)[0])
    out, trace = tmp_path / "out.mf", tmp_path / "trace.txt"
    assert main(["act", "line", kernel, module, "-o", str(out), "--trace", str(trace)]) == 0
    result = parse_mf(out.read_text())
    assert mf_validate(result).ok
    assert result.potential == s.w()
    assert parse_trace(trace.read_text()).verify().ok


def test_act_with_unit_kernel_returns_the_module(tmp_path):
    s = line_scenario()
    kernel = _write(tmp_path, "unit.mf", unit_kernel(s))
    module = _write(tmp_path, "m.mf", sample_modules(s)[0])
    out = tmp_path / "same.mf"
    assert main(["act", "line", kernel, module, "-o", str(out)]) == 0
    assert out.read_bytes() == Path(module).read_bytes()


def test_output_is_deterministic(tmp_path):
    left = _write(tmp_path, "a.mf", mf_koszul_pair(XY, "x", "y", 0))
    right = _write(tmp_path, "b.mf", mf_koszul_pair(XY, "x + y", "x - y", 0))
    first, second = tmp_path / "first.mf", tmp_path / "second.mf"
    assert main(["tensor", left, right, "-o", str(first)]) == 0
    assert main(["tensor", left, right, "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    s = line_scenario()
    kernel = _write(tmp_path, "unit.mf", unit_kernel(s))
    module = _write(tmp_path, "m.mf", sample_modules(s)[-1])
    runs = []
    for name in ("act1.mf", "act2.mf"):
        assert main(["act", "line", kernel, module, "-o", str(tmp_path / name)]) == 0
        runs.append((tmp_path / name).read_bytes())
    assert runs[0] == runs[1]


def test_reduce_with_exclusion(tmp_path):
    ring = Ring(("u", "x", "y"))
    m = mf_tensor(mf_koszul_pair(ring, "x", "u"), mf_koszul_pair(ring, "u - y", "-x"))
    path = _write(tmp_path, "big.mf", m)
    out = tmp_path / "small.mf"
    assert main(["reduce", path, "--eliminate", "u", "-o", str(out)]) == 0
    assert parse_mf(out.read_text()) == mf_koszul_pair(Ring(("x", "y")), "x", "y")


def test_equiv_negative_control(tmp_path, capsys):
    left = _write(tmp_path, "a.mf", mf_koszul_pair(XY, "x", "y", 0))
    right = _write(tmp_path, "b.mf", mf_koszul_pair(XY, "y", "x", 0))
    assert main(["equiv", left, right]) == 1
    assert "not equivalent" in capsys.readouterr().err


def test_equiv_writes_certificate(tmp_path):
    k = _write(tmp_path, "k.mf", mf_koszul_pair(XY, "x", "y", 0))
    out = tmp_path / "cert.txt"
    assert main(["equiv", k, k, "-o", str(out)]) == 0
    assert main(["validate", str(out)]) == 0


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        test_tensor_as_json(Path(tmp))
        test_act_with_unit_kernel(Path(tmp))
        test_act_with_unit_kernel_returns_the_module(Path(tmp))
        test_output_is_deterministic(Path(tmp))
        test_reduce_with_exclusion(Path(tmp))
        test_equiv_writes_certificate(Path(tmp))
        test_unreadable_input_exits_with_two(Path(tmp))
    print("cli tests passed")
