import json
import subprocess
import sys

import numpy as np
import pytest

from wlike.cli import main, parse_grid
from wlike.operator_core import MultipartiteOperator


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid_forms():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len(parse_grid("0:1:0.01")) == 101
    assert parse_grid("2,5,9", integer=True) == [2, 5, 9]
    assert parse_grid("7", integer=True) == [7]


@pytest.mark.parametrize("bad", ["0:1:0", "1:0:0.1", "a:b:c", ","])
def test_parse_grid_rejects(capsys, bad):
    code, _, err = run(capsys, "sweep-filter", "--n", "3", "--eps-grid", bad)
    assert code == 2 and "error" in err


def test_construct_dump(tmp_path, capsys):
    out = tmp_path / "rho.json"
    code, stdout, _ = run(capsys, "construct", "--n", "3", "--d", "2", "--out", str(out))
    assert code == 0
    op = MultipartiteOperator.from_json_dict(json.loads(out.read_text()))
    assert op.side == 512
    assert op.trace().real == pytest.approx(1.0, abs=1e-12)
    assert "trace=1" in stdout and "hermiticity_residual" in stdout and "min_eigenvalue" in stdout


def test_construct_without_builtin_unitary(capsys):
    code, _, err = run(capsys, "construct", "--n", "3", "--d", "3")
    assert code == 2
    assert "no built-in unitary for D=3" in err


def test_construct_size_limit(capsys):
    code, _, err = run(capsys, "construct", "--n", "4", "--d", "2", "--size-limit", "1000")
    assert code == 2 and "error" in err


def test_construct_user_unitary(tmp_path, capsys):
    u = np.array([[0, -1j], [1j, 0]]) / 1.0
    path = tmp_path / "u.json"
    path.write_text(json.dumps({"d": 2, "re": u.real.tolist(), "im": u.imag.tolist()}))
    code, _, _ = run(capsys, "ppt-check", "--n", "3", "--d", "2", "--unitary", str(path))
    assert code == 0


def test_bad_unitary_file(tmp_path, capsys):
    path = tmp_path / "u.json"
    path.write_text(json.dumps({"d": 2, "re": [[1, 1], [0, 1]], "im": [[0, 0], [0, 0]]}))
    code, _, _ = run(capsys, "construct", "--n", "3", "--d", "2", "--unitary", str(path))
    assert code == 2


def test_ppt_check_family(capsys):
    code, out, _ = run(capsys, "ppt-check", "--n", "3", "--d", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 3 and all(line.endswith("PPT") for line in lines)


def test_ppt_check_single_party(capsys):
    code, out, _ = run(capsys, "ppt-check", "--n", "3", "--d", "2", "--party", "2")
    assert code == 0
    assert out.strip().splitlines() == [out.strip()]
    assert out.startswith("party 2:")


def test_ppt_check_w_state(capsys):
    code, out, _ = run(capsys, "ppt-check", "--w-state", "--n", "3")
    assert code == 1
    assert "NPT" in out


def test_ppt_check_input_dump(tmp_path, capsys):
    psi = np.zeros(4)
    psi[[1, 2]] = 2 ** -0.5
    op = MultipartiteOperator((2, 2), np.outer(psi, psi))
    path = tmp_path / "op.json"
    path.write_text(json.dumps(op.to_json_dict()))
    code, out, _ = run(capsys, "ppt-check", "--input", str(path))
    assert code == 1 and out.count("NPT") == 2


def test_ppt_bad_party(capsys):
    code, _, _ = run(capsys, "ppt-check", "--n", "3", "--d", "2", "--party", "7")
    assert code == 2


FILTER_HEADER = "N,D,epsilon,q,i_ab,i_ae,rate,rate_clamped"
RANDOM_HEADER = "D,M,q,i_ab,i_ae,rate,rate_clamped"


def test_sweep_filter_single_point(capsys):
    code, out, _ = run(capsys, "sweep-filter", "--n", "3", "--d-grid", "2", "--eps-grid", "0.5")
    assert code == 0
    header, *rows = out.splitlines()
    assert header == FILTER_HEADER
    assert len(rows) == 1
    fields = rows[0].split(",")
    assert fields[:3] == ["3", "2", "0.5"]
    assert float(fields[3]) == pytest.approx(141 / 576, abs=1e-12)
    assert float(fields[6]) < 0 and float(fields[7]) == 0


def test_sweep_random_rows(capsys):
    code, out, _ = run(capsys, "sweep-random", "--d-grid", "2", "--m-grid", "1,2,100000")
    assert code == 0
    header, *rows = out.splitlines()
    assert header == RANDOM_HEADER
    qs = [float(r.split(",")[2]) for r in rows]
    assert qs[0] == pytest.approx(23 / 144, abs=1e-12)
    assert qs[1] == pytest.approx(35 / 162, abs=1e-12)
    assert abs(qs[2] - 1 / 3) < 1e-4


def test_sweep_json_and_svg(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep-random", "--d-grid", "2:4:1", "--m", "3", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [d["D"] for d in data] == [2, 3, 4]
    svg = tmp_path / "a.svg"
    code, _, _ = run(capsys, "sweep-filter", "--n", "3", "--d-grid", "2:2000:199",
                     "--eps-grid", "0:1:0.1", "--format", "svg", "--out", str(svg))
    text = svg.read_text()
    assert code == 0 and text.startswith("<svg") and "<script" not in text
    assert text.count("<rect") == 11 * 11


def csv_bytes(tmp_path, name, *argv):
    path = tmp_path / name
    assert main([*argv, "--out", str(path)]) == 0
    return path.read_bytes()


def test_csv_byte_determinism(tmp_path):
    args = ("sweep-filter", "--n", "3", "--d-grid", "2:3000:37", "--eps-grid", "0:1:0.05")
    a = csv_bytes(tmp_path, "a.csv", *args)
    b = csv_bytes(tmp_path, "b.csv", *args)
    c = csv_bytes(tmp_path, "c.csv", *args, "--jobs", "4")
    assert a == b == c
    assert b"\r" not in a
    r = ("sweep-random", "--d-grid", "2:300:7", "--m-grid", "1:200:13")
    assert csv_bytes(tmp_path, "d.csv", *r) == csv_bytes(tmp_path, "e.csv", *r, "--jobs", "3")


def test_csv_backends_identical(tmp_path):
    from wlike import kernels

    if "cython" not in kernels.BACKENDS:
        pytest.skip("extension not built")
    args = ("sweep-filter", "--n", "3", "--d-grid", "2:3000:37", "--eps-grid", "0:1:0.05")
    a = csv_bytes(tmp_path, "a.csv", *args, "--backend", "python")
    b = csv_bytes(tmp_path, "b.csv", *args, "--backend", "cython")
    rows_a = [line.split(",") for line in a.decode().splitlines()[1:]]
    rows_b = [line.split(",") for line in b.decode().splitlines()[1:]]
    for ra, rb in zip(rows_a, rows_b):
        assert ra[:4] == rb[:4]
        np.testing.assert_allclose([float(v) for v in ra[4:]], [float(v) for v in rb[4:]], atol=1e-11)


def test_thresholds(capsys):
    code, out, _ = run(capsys, "thresholds", "--mode", "both")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("random:") and lines[1].startswith("filter:")
    assert "no threshold" not in out


def test_thresholds_none_found(capsys):
    code, out, _ = run(capsys, "thresholds", "--mode", "random", "--d-grid", "2:10:1")
    assert code == 0
    assert "no threshold in range" in out


def test_multikey(capsys):
    code, out, _ = run(capsys, "multikey", "--rates", "0.2,0.2,0.2")
    assert code == 0
    assert "triangle bound: 0.3" in out and "chain bound (N=3): 0.1" in out
    code, out, _ = run(capsys, "multikey", "--rates", "1,1,2")
    assert code == 0 and "triangle bound: 2" in out
    code, out, _ = run(capsys, "multikey", "--rates", "1,1,3")
    assert code == 1 and "violated" in out
    code, _, _ = run(capsys, "multikey", "--rates=-1,1,1")
    assert code == 2


@pytest.mark.parametrize("pair", ["1,2", "1,3", "3,2"])
def test_squeeze(capsys, pair):
    code, out, _ = run(capsys, "squeeze", "--n", "3", "--d", "2", "--pair", pair)
    assert code == 0
    rows = [list(map(float, line.split())) for line in out.splitlines()[:4]]
    assert rows[1][1] == pytest.approx(10 / 36) and rows[1][2] == pytest.approx(2 / 36)


def test_squeeze_bad_pair(capsys):
    assert main(["squeeze", "--n", "3", "--d", "2", "--pair", "1,1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["squeeze", "--n", "3", "--d", "2", "--pair", "x"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "wlike", "multikey", "--rates", "1,1,1"],
        capture_output=True, text=True,
    )
    assert res.returncode == 0 and "1.5" in res.stdout
