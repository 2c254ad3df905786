import csv
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from blaschke import SpecFileError, catalog, format_spec, load_spec, make_blaschke, parse_spec
from blaschke.cli import JSON_KEYS, main, parse_coefficients, verify_report

SPECS = Path(__file__).resolve().parent.parent / "specs"


def spec(name):
    return str(SPECS / f"{name}.toml")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestSpecFiles:
    def test_round_trip(self):
        for path in SPECS.glob("*.toml"):
            s = load_spec(path)
            again = parse_spec(format_spec(s.product, s.name))
            assert again.product == s.product and again.name == s.name

    @pytest.mark.parametrize(
        "text",
        [
            'lambda = [1.0, 0.0]\nzeros = [[0.5, 0.0]',
            'lambda = [1.0, 0.0]',
            'lambda = [1.0, 0.0]\nzeros = [[0.5, 0.0]]\ncolour = "red"',
            'lambda = [2.0, 0.0]\nzeros = [[0.5, 0.0]]',
            'lambda = [1.0, 0.0]\nzeros = [[1.0, 0.0]]',
            'lambda = [1.0]\nzeros = [[0.5, 0.0]]',
        ],
    )
    def test_rejections(self, text):
        with pytest.raises(SpecFileError):
            parse_spec(text)


class TestClassify:
    def test_r1_summary(self, capsys):
        code, out, _ = run(capsys, "classify", spec("r1"))
        assert code == 0
        assert out.strip().splitlines()[-1] == "InteriorFixed; Julia=FullCircle; simple=true; K0=Z; K1=Z"

    @pytest.mark.parametrize(
        "name, prefix",
        [
            ("r2", "BoundaryAttracting; Julia=Cantor; simple=false"),
            ("r3", "ParabolicTwoPetals; Julia=FullCircle; simple=true"),
            ("r4", "ParabolicOnePetal; Julia=Cantor; simple=false"),
            ("p3", "InteriorFixed; Julia=FullCircle; simple=true; K0=Z+Z/2Z"),
        ],
    )
    def test_other_examples(self, capsys, name, prefix):
        code, out, _ = run(capsys, "classify", spec(name))
        assert code == 0 and out.strip().splitlines()[-1].startswith(prefix)

    def test_quotient_note(self, capsys):
        _, out, _ = run(capsys, "classify", spec("r2"))
        assert "O_2" in out

    def test_json_single_line(self, capsys):
        code, out, _ = run(capsys, "classify", "--json", spec("r1"))
        lines = out.strip().splitlines()
        assert code == 0 and len(lines) == 1
        pairs = [kv.split("=", 1) for kv in lines[0].split(";")]
        assert [k for k, _ in pairs] == list(JSON_KEYS)
        d = dict(pairs)
        assert d["class"] == "InteriorFixed" and d["identity_class"] == "(0,1)"
        assert complex(d["w0"].replace("i", "j")) == pytest.approx((-3 + 5**0.5) / 2, abs=1e-12)

    def test_degree_one(self, capsys):
        code, out, _ = run(capsys, "classify", spec("rotation_order3"))
        assert code == 0
        assert out.strip().splitlines()[-1] == "EllipticFiniteOrder(3); K0=Z; K1=Z"
        _, out, _ = run(capsys, "classify", spec("rotation_1rad"))
        assert "CrossedProductByZ" in out and "K0=Z^2" in out

    def test_zero_on_circle_is_input_error(self, capsys, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text('lambda = [1.0, 0.0]\nzeros = [[0.0, 1.0]]\n')
        code, _, err = run(capsys, "classify", str(p))
        assert code == 2 and "error" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "classify", str(tmp_path / "nope.toml"))
        assert code == 2

    def test_ambiguous_exit(self, capsys, tmp_path):
        # multiplier 1 - 1e-7 at the boundary fixed point
        r = (1 / 3 + 1e-7 * 4 / 9) ** 0.5
        p = tmp_path / "amb.toml"
        p.write_text(format_spec(make_blaschke(1, [1j * r, -1j * r]), "amb"))
        code, _, err = run(capsys, "classify", str(p))
        assert code == 3 and "multiplier" in err

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "blaschke", "classify", spec("r1")],
                             capture_output=True, text=True)
        assert res.returncode == 0 and "InteriorFixed" in res.stdout


class TestVerify:
    def test_r1_passes(self, capsys, tmp_path):
        out_csv = tmp_path / "v.csv"
        code, out, _ = run(capsys, "verify", spec("r1"), "--cutoff", "256", "--out", str(out_csv))
        assert code == 0 and out.strip().endswith("overall: PASS")
        rows = read_csv(out_csv)
        assert rows[0] == ["identity", "cutoff", "defect", "tol", "status"]
        assert all(r[4] == "PASS" for r in rows[1:])

    def test_p2_machine_precision(self, capsys):
        code, _, _ = run(capsys, "verify", spec("p2"), "--cutoff", "64", "--tol", "1e-12")
        assert code == 0

    def test_defects_halve_with_cutoff(self):
        small = verify_report(catalog.R1(), 32, ["e1", "e-1", "e2"], 1e-6)
        large = verify_report(catalog.R1(), 256, ["e1", "e-1", "e2"], 1e-6)
        for a, b in zip(small.records, large.records):
            assert a.identity == b.identity
            assert b.defect <= max(0.5 * a.defect, 1e-12), a.identity

    def test_failure_exit(self, capsys):
        # the basis Gram check at N = 32 is truncation limited for R1
        code, out, _ = run(capsys, "verify", spec("r1"), "--cutoff", "32")
        assert code == 4 and "FAIL" in out

    @pytest.mark.parametrize("argv", [["--cutoff", "100"], ["--cutoff", "16"], ["--symbols", "x3"]])
    def test_bad_arguments(self, capsys, argv):
        code, _, _ = run(capsys, "verify", spec("r1"), *argv)
        assert code == 2

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify", spec("p2"), "--cutoff", "64",
                         "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == 2


class TestJulia:
    def test_r2_cantor(self, capsys, tmp_path):
        out_csv = tmp_path / "j.csv"
        code, out, _ = run(capsys, "julia", spec("r2"), "--out", str(out_csv))
        assert code == 0
        gap = float(out.split("max_gap=")[1].split()[0])
        assert gap >= 0.2 and "analytic_julia=Cantor" in out
        rows = read_csv(out_csv)
        assert rows[0] == ["index", "angle_radians"] and len(rows) == 10_001

    def test_p2_dense(self, capsys):
        code, out, _ = run(capsys, "julia", spec("p2"))
        assert code == 0 and float(out.split("max_gap=")[1].split()[0]) <= 0.05

    def test_degree_one(self, capsys):
        code, _, err = run(capsys, "julia", spec("hyperbolic"))
        assert code == 2 and "julia requires degree" in err

    def test_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "julia", spec("r4"), "--count", "2000", "--seed", "5", "--out", str(a))
        run(capsys, "julia", spec("r4"), "--count", "2000", "--seed", "5", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_small_count_rejected(self, capsys):
        code, _, _ = run(capsys, "julia", spec("r1"), "--count", "10")
        assert code == 2


class TestBasis:
    def test_p3_columns(self, capsys, tmp_path):
        out_csv = tmp_path / "b.csv"
        code, out, _ = run(capsys, "basis", spec("p3"), "--grid", "64", "--out", str(out_csv))
        assert code == 0
        rows = read_csv(out_csv)
        assert rows[0] == ["i", "node_angle", "re(u_i)", "im(u_i)"]
        data = np.array(rows[1:], dtype=float)
        for i in (1, 2, 3):
            sel = data[data[:, 0] == i]
            want = np.exp(1j * (i - 1) * sel[:, 1])
            assert np.max(np.abs(sel[:, 2] + 1j * sel[:, 3] - want)) <= 1e-14

    @pytest.mark.parametrize("name", ["r1", "r3"])
    def test_defect(self, capsys, name):
        code, out, _ = run(capsys, "basis", spec(name))
        assert code == 0 and float(out.split("orthonormality_defect=")[1]) <= 1e-8

    def test_bad_grid(self, capsys):
        assert run(capsys, "basis", spec("r1"), "--grid", "100")[0] == 2


class TestTransfer:
    def test_p2_e2_to_e1(self, capsys, tmp_path):
        out_csv = tmp_path / "t.csv"
        code, out, _ = run(capsys, "transfer", spec("p2"), "--symbol", "2=1", "--out", str(out_csv))
        assert code == 0 and "coefficients: 1=" in out
        rows = read_csv(out_csv)
        data = np.array(rows[1:], dtype=float)
        coef = dict(zip(data[:, 4].astype(int), data[:, 5] + 1j * data[:, 6]))
        assert abs(coef.pop(1) - 1) <= 1e-10
        assert max(abs(v) for v in coef.values()) <= 1e-10

    def test_p2_odd_mode_vanishes(self, capsys):
        code, out, _ = run(capsys, "transfer", spec("p2"), "--symbol", "1=1")
        assert code == 0 and "none above" in out

    def test_poisson_mass(self, capsys):
        for name in ("r1", "r2", "r3", "r4"):
            _, out, _ = run(capsys, "transfer", spec(name))
            assert float(out.split("poisson_mass_residual=")[1]) <= 1e-9

    @pytest.mark.parametrize("sym", ["2", "a=1", "1=x", "", "200=1"])
    def test_malformed_symbol(self, capsys, sym):
        assert run(capsys, "transfer", spec("r1"), "--symbol", sym)[0] == 2

    def test_parse_coefficients(self):
        assert parse_coefficients("0=1, -1=0.5j, 2=1+2i") == {0: 1, -1: 0.5j, 2: 1 + 2j}
