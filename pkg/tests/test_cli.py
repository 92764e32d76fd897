import io
import json
import subprocess
import sys

import numpy as np
import pytest

from intervalexpm import IntervalMatrix, fileformat
from intervalexpm.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def example1(data_dir):
    return str(data_dir / "example1.json")


@pytest.fixture
def bochev(data_dir):
    return str(data_dir / "bochev.json")


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestExpm:
    def test_text_output_matches_reference_digits(self, example1):
        code, out, _ = run("expm", "--method", "ss", "--L", "10", "--K", "10", example1)
        assert code == 0
        assert "K=10  L=10" in out
        assert "[0.3166, 0.4325]" in out or "[0.3165, 0.4325]" in out
        assert "width_norm:" in out

    def test_text_rounds_outward(self, example1):
        _, out, _ = run("expm", "--method", "ss", "--L", "10", "--K", "10", example1)
        _, js, _ = run("expm", "--method", "ss", "--L", "10", "--K", "10", "--format", "json", example1)
        M = fileformat.loads(js)
        cell = out.splitlines()[1].split("[")[2].rstrip("] ")
        lo_text, hi_text = (float(v) for v in cell.split(","))
        assert lo_text <= M.lower[0, 1] and M.upper[0, 1] <= hi_text

    def test_zero_matrix_gives_identity(self, tmp_path):
        f = write(tmp_path, "z.json", '{"entries": [[0, 0], [0, 0]]}')
        code, out, _ = run("expm", "--format", "json", f)
        assert code == 0
        assert fileformat.loads(out) == IntervalMatrix.identity(2)

    def test_auto_params_are_echoed(self, example1):
        code, out, _ = run("expm", "--format", "json", example1)
        doc = json.loads(out)
        assert (doc["method"], doc["K"], doc["L"], doc["preconditioned"]) == ("scaling_squaring", 17, 2, False)
        assert doc["width_norm"] == pytest.approx(fileformat.loads(out).width_norm())

    def test_json_round_trip_contains_result(self, example1, tmp_path):
        from intervalexpm import enclose
        from intervalexpm.oracle import example1_matrix
        _, out, _ = run("expm", "--method", "horner", "--K", "20", "--format", "json", example1)
        assert enclose(example1_matrix(), "horner", K=20).enclosure.subset(fileformat.loads(out))

    def test_csv(self, example1):
        code, out, _ = run("expm", "--method", "taylor", "--K", "16", "--format", "csv", example1)
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("# method=taylor K=16 L=0")
        assert lines[1] == "row,col,lower,upper"
        assert len(lines) == 6

    def test_preconditioned_bochev(self, bochev):
        code, out, _ = run("expm", "--method", "ss", "--L", "12", "--K", "12", "--precondition",
                           "--format", "json", bochev)
        assert code == 0
        w = json.loads(out)["width_norm"]
        assert 7.2e-12 <= w <= 7.2e-10

    def test_precondition_requires_ss(self, bochev):
        code, _, err = run("expm", "--method", "horner", "--precondition", bochev)
        assert code == 3 and "precondition" in err

    def test_domain_error(self, bochev):
        code, _, err = run("expm", "--method", "ss", "--L", "0", "--K", "5", bochev)
        assert code == 3
        assert err.startswith("intervalexpm expm:") and err.count("\n") == 1

    def test_non_square(self, tmp_path):
        f = write(tmp_path, "r.json", '{"entries": [[1, 2, 3]]}')
        assert run("expm", f)[0] == 3

    def test_parse_errors(self, tmp_path):
        assert run("expm", write(tmp_path, "bad.json", "{nope"))[0] == 2
        assert run("expm", str(tmp_path / "missing.json"))[0] == 2
        assert run("expm", "--method", "pade", "x")[0] == 2
        assert run()[0] == 2

    def test_singular_basis_exit_4(self, tmp_path, monkeypatch):
        import intervalexpm.cli as cli
        from intervalexpm import SingularError

        def boom(_):
            raise SingularError("residual norm 1.5 >= 1")

        monkeypatch.setattr(cli, "schur_basis", boom)
        f = write(tmp_path, "m.json", '{"entries": [[1, 2], [3, 4]]}')
        code, _, err = run("expm", "--precondition", f)
        assert code == 4 and "residual" in err


class TestHull:
    def test_text(self):
        code, out, _ = run("hull2x2", "--t-lo", "-3", "--t-hi", "-2")
        assert code == 0 and "[0.316737, 0.432333]" in out and "[0.0497870, 0.135336]" in out

    def test_json(self):
        code, out, _ = run("hull2x2", "--t-lo", "-3", "--t-hi", "-2", "--format", "json")
        H = fileformat.loads(out)
        assert H[1, 1].contains(np.exp(-2.0))

    def test_reversed(self):
        assert run("hull2x2", "--t-lo", "1", "--t-hi", "0")[0] == 3


class TestSweep:
    def test_single_zero_row(self, data_dir):
        code, out, _ = run("sweep", "--eps-min", "0", "--eps-max", "0", "--eps-count", "1",
                           "--K-horner", "60", str(data_dir / "bochev_tenth.json"))
        lines = out.splitlines()
        assert code == 0 and len(lines) == 2
        assert lines[0] == "epsilon,width_horner,width_ss,width_lower_bound"
        assert float(lines[1].split(",")[0]) == 0

    def test_grid_and_determinism(self, data_dir):
        args = ("sweep", "--eps-min", "1e-12", "--eps-max", "1e-6", "--eps-count", "4",
                "--K-horner", "60", str(data_dir / "bochev_tenth.json"))
        a, b = run(*args), run(*args)
        assert a[0] == 0 and a[1] == b[1]
        eps = [float(l.split(",")[0]) for l in a[1].splitlines()[1:]]
        assert eps[0] == pytest.approx(1e-12) and eps[-1] == pytest.approx(1e-6)

    def test_precondition_failure_names_epsilon(self, data_dir):
        code, _, err = run("sweep", "--eps-min", "1e-3", "--eps-max", "1", "--eps-count", "3",
                           "--K-horner", "20", "--L", "0", "--K", "5",
                           str(data_dir / "bochev_tenth.json"))
        assert code == 3 and "epsilon=" in err

    def test_bad_grid(self, data_dir):
        assert run("sweep", "--eps-min", "-1", "--eps-max", "1", "--eps-count", "3",
                   str(data_dir / "bochev_tenth.json"))[0] == 3


class TestVerify:
    def test_default_corpus_passes(self):
        code, out, _ = run("verify", "--samples", "30")
        assert code == 0
        assert out.count("PASS") == 5 and out.strip().endswith("all properties hold")

    def test_fault_injection_fails(self):
        code, out, _ = run("verify", "--samples", "10", "--inject-fault")
        assert code == 1
        assert "FAIL" in out and "PROPERTY VIOLATION" in out

    def test_user_matrix(self, example1):
        code, out, _ = run("verify", "--samples", "20", example1)
        assert code == 0 and out.count("PASS") == 3


class TestGenBilinear:
    def test_byte_determinism(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run("gen-bilinear", "--n", "1", "--seed", "7", str(a))[0] == 0
        assert run("gen-bilinear", "--n", "1", "--seed", "7", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.json.corner.json").read_bytes() == (tmp_path / "b.json.corner.json").read_bytes()
        assert fileformat.read_matrix(a).shape == (4, 4)

    def test_pipeline_corner_containment(self, tmp_path):
        out = tmp_path / "inst.json"
        run("gen-bilinear", "--n", "3", "--seed", "11", str(out))
        corner = json.loads((tmp_path / "inst.json.corner.json").read_text())
        for method in ("taylor", "horner", "ss"):
            code, js, _ = run("expm", "--method", method, "--format", "json", str(out))
            E = fileformat.loads(js)
            i, j = corner["row"], corner["col"]
            assert code == 0
            assert E.lower[i, j] <= corner["lower"] and corner["upper"] <= E.upper[i, j]

    def test_size_error(self, tmp_path):
        code, _, err = run("gen-bilinear", "--n", "13", "--seed", "1", str(tmp_path / "x.json"))
        assert code == 3 and "SizeError" in err

    def test_unwritable(self, tmp_path):
        code, _, _ = run("gen-bilinear", "--n", "1", "--seed", "1", str(tmp_path / "no" / "x.json"))
        assert code == 2


def test_console_entry_point(example1):
    proc = subprocess.run([sys.executable, "-m", "intervalexpm.cli", "expm", example1],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "scaling_squaring" in proc.stdout
