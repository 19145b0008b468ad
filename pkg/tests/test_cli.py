import json
import subprocess
import sys

import numpy as np
import pytest

from fixtures import X8_TREE, IRIS8, IRIS7_COPHENETIC, IRIS8_HAAR
from ultrametric import io
from ultrametric.cli import run

HELP_COMMANDS = [
    ["cluster"], ["ultrametric"], ["baire"], ["padic"], ["padic", "encode"], ["padic", "decode"],
    ["padic", "distance"], ["padic", "dilate"], ["glattice"], ["haar"], ["haar", "forward"],
    ["haar", "inverse"], ["haar", "regress"], ["umetry"], ["segment"], ["bench"],
]


def read_csv_body(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return [ln.split(",") for ln in lines]


def csv_metadata(path):
    out = {}
    for ln in path.read_text().splitlines():
        if ln.startswith("# "):
            key, _, value = ln[2:].partition(": ")
            out[key] = json.loads(value)
    return out


@pytest.fixture
def bad_csv(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n3,oops\n")
    return p


@pytest.fixture
def signal_csv(tmp_path):
    rng = np.random.default_rng(0)
    sig = np.concatenate([rng.standard_normal(3000), 6 + rng.standard_normal(3000)])
    p = tmp_path / "signal.csv"
    p.write_text("value\n" + "\n".join(f"{v:.6f}" for v in sig) + "\n")
    return p


@pytest.mark.parametrize("cmd", HELP_COMMANDS, ids=lambda c: "-".join(c))
def test_help(cmd, capsys):
    assert run([*cmd, "--help"]) == 0
    assert "usage:" in capsys.readouterr().out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ultrametric", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout


def test_bad_arguments():
    assert run(["cluster"]) == 2
    assert run(["cluster", "--input", "x.csv", "--criterion", "centroid"]) == 2
    assert run(["umetry", "--n", "0"]) == 2
    assert run(["nonsense"]) == 2


class TestCluster:
    def test_constrained_reproduces_iris7_cophenetic(self, tmp_path, data_dir):
        out, coph = tmp_path / "tree.json", tmp_path / "coph.csv"
        code = run(["cluster", "--input", str(data_dir / "iris7.csv"), "--id-column", "--criterion",
                    "complete", "--constrained", "--output", str(out), "--cophenetic", str(coph),
                    "--newick", str(tmp_path / "tree.nwk"), "--no-timestamp"])
        assert code == 0
        _, m = io.read_matrix(coph)
        assert np.allclose(m, IRIS7_COPHENETIC, atol=1e-6)
        doc = json.loads(out.read_text())
        assert doc["terminals"][0] == "iris1"
        assert doc["metadata"]["criterion"] == "complete"
        assert (tmp_path / "tree.nwk").read_text().endswith(";\n")

    def test_median_flags_inversion_metadata(self, tmp_path):
        p = tmp_path / "tri.csv"
        p.write_text("x,y\n0,0\n1,0\n0.5,0.8\n")
        assert run(["cluster", "--input", str(p), "--criterion", "median", "--output",
                    str(tmp_path / "t.json")]) == 0
        doc = json.loads((tmp_path / "t.json").read_text())
        assert doc["metadata"]["inversions"] is True
        assert io.read_dendrogram(tmp_path / "t.json").has_inversions

    def test_malformed(self, bad_csv):
        assert run(["cluster", "--input", str(bad_csv)]) == 3

    def test_missing_file(self, tmp_path):
        assert run(["cluster", "--input", str(tmp_path / "nope.csv")]) == 3

    def test_too_few_objects(self, tmp_path):
        p = tmp_path / "one.csv"
        p.write_text("a,b\n1,2\n")
        assert run(["cluster", "--input", str(p)]) == 4

    def test_byte_identical_reruns(self, tmp_path, data_dir):
        outs = []
        for k in range(2):
            out = tmp_path / f"t{k}.json"
            run(["cluster", "--input", str(data_dir / "iris8.csv"), "--id-column", "--criterion", "ward",
                 "--output", str(out), "--no-timestamp"])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_timestamp_present_by_default(self, tmp_path, data_dir):
        out = tmp_path / "t.json"
        run(["cluster", "--input", str(data_dir / "iris8.csv"), "--id-column", "--output", str(out)])
        assert "timestamp" in json.loads(out.read_text())["metadata"]


class TestUltrametric:
    def test_verify_and_order(self, tmp_path, data_dir, capsys):
        m = str(data_dir / "iris7_ultrametric.csv")
        assert run(["ultrametric", "verify", "--matrix", m, "--no-timestamp"]) == 0
        assert json.loads(capsys.readouterr().out)["ultrametric"] is True
        assert run(["ultrametric", "order", "--matrix", m, "--no-timestamp"]) == 0
        assert json.loads(capsys.readouterr().out)["order"] == [f"iris{i}" for i in range(1, 8)]

    def test_strict_failure(self, tmp_path):
        p = tmp_path / "m.csv"
        io.write_matrix(p, ["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
        assert run(["ultrametric", "verify", "--matrix", str(p)]) == 0
        assert run(["ultrametric", "verify", "--matrix", str(p), "--strict"]) == 4
        assert run(["ultrametric", "order", "--matrix", str(p)]) == 4

    def test_asymmetric(self, tmp_path):
        p = tmp_path / "m.csv"
        io.write_matrix(p, ["a", "b"], [[0, 1], [2, 0]])
        assert run(["ultrametric", "verify", "--matrix", str(p)]) == 4

    def test_not_square(self, bad_csv, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text(",a,b\nx,0,1\n")
        assert run(["ultrametric", "verify", "--matrix", str(p)]) == 3
        assert run(["ultrametric", "verify", "--matrix", str(bad_csv)]) == 3


class TestBaire:
    def test_report_and_hierarchy(self, tmp_path):
        p = tmp_path / "occ.csv"
        rng = np.random.default_rng(0)
        m = (rng.random((200, 12)) < 0.3).astype(int)
        m[:, 0] = 1
        p.write_text(",".join(f"c{j}" for j in range(12)) + "\n"
                     + "\n".join(",".join(map(str, r)) for r in m) + "\n")
        report, out = tmp_path / "r.csv", tmp_path / "h.json"
        assert run(["baire", "--input", str(p), "--seed", "42", "--precision", "3", "--report", str(report),
                    "--output", str(out), "--no-timestamp"]) == 0
        rows = read_csv_body(report)
        assert rows[0] == ["level", "n_clusters", "n_mixed_blocks"]
        counts = [int(r[1]) for r in rows[1:]]
        assert counts == sorted(counts) and len(counts) == 3
        assert csv_metadata(report)["seed"] == 42
        doc = json.loads(out.read_text())
        assert len(doc["digits"]) == 200 and all(len(d) == 3 for d in doc["digits"])

    def test_zero_column(self, tmp_path):
        p = tmp_path / "z.csv"
        p.write_text("a,b\n1,0\n0,0\n")
        assert run(["baire", "--input", str(p)]) == 4

    def test_malformed(self, bad_csv):
        assert run(["baire", "--input", str(bad_csv)]) == 3


class TestPadic:
    def test_round_trip(self, tmp_path, data_dir):
        codes, back = tmp_path / "codes.csv", tmp_path / "back.json"
        assert run(["padic", "encode", "--tree", str(data_dir / "x8_tree.json"), "--p", "3",
                    "--output", str(codes), "--no-timestamp"]) == 0
        rows = read_csv_body(codes)
        assert rows[0] == ["terminal", *[f"c_{j}" for j in range(1, 8)], "decimal"]
        assert rows[1] == ["x1", "1", "1", "0", "0", "1", "0", "1", "2442"]
        assert run(["padic", "decode", "--codes", str(codes), "--output", str(back)]) == 0
        assert io.read_dendrogram(back) == X8_TREE

    def test_distance_and_dilate(self, tmp_path, data_dir, capsys):
        codes = tmp_path / "codes.csv"
        run(["padic", "encode", "--tree", str(data_dir / "x8_tree.json"), "--p", "2", "--output", str(codes)])
        assert run(["padic", "distance", "--codes", str(codes), "--p", "2", "--a", "x5", "--b", "x8"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["r"] == 7 and doc["distance"] == 2.0**-7
        dil = tmp_path / "dil.csv"
        assert run(["padic", "dilate", "--codes", str(codes), "--p", "2", "--output", str(dil)]) == 0
        assert read_csv_body(dil)[1] == ["x1", "1", "0", "0", "1", "0", "1", "82"]
        assert run(["padic", "dilate", "--codes", str(codes), "--p", "2", "--times", "8"]) == 4

    def test_bad_codes(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("terminal,c_1,decimal\na,2,6\nb,-1,-3\n")
        assert run(["padic", "decode", "--codes", str(p)]) == 3

    def test_inconsistent_codes(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("terminal,c_1,c_2\na,1,1\nb,-1,1\nc,1,-1\n")
        assert run(["padic", "decode", "--codes", str(p)]) == 4

    def test_bad_tree_json(self, tmp_path):
        p = tmp_path / "t.json"
        p.write_text("{not json")
        assert run(["padic", "encode", "--tree", str(p)]) == 3


class TestGlattice:
    def test_level_two(self, tmp_path, data_dir):
        out = tmp_path / "c.json"
        assert run(["glattice", "--input", str(data_dir / "boolean5.csv"), "--id-column", "--level", "2",
                    "--output", str(out)]) == 0
        assert json.loads(out.read_text())["clusters"] == [["a", "b", "c", "f"], ["a", "c", "e"]]

    def test_non_boolean(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("u,v\n1,0\n2,1\n")
        assert run(["glattice", "--input", str(p), "--level", "1"]) == 3

    def test_level_out_of_range(self, data_dir):
        assert run(["glattice", "--input", str(data_dir / "boolean5.csv"), "--id-column", "--level", "5"]) == 4


class TestHaar:
    def test_forward_inverse_regress(self, tmp_path, data_dir):
        tree, data = str(data_dir / "iris8_median_tree.json"), str(data_dir / "iris8.csv")
        coeffs, back, reg = tmp_path / "w.csv", tmp_path / "x.csv", tmp_path / "r.csv"
        assert run(["haar", "forward", "--tree", tree, "--data", data, "--id-column",
                    "--output", str(coeffs)]) == 0
        _, names, table = io.read_table(coeffs, id_column=True)
        assert names == ["s_7", "d_7", "d_6", "d_5", "d_4", "d_3", "d_2", "d_1"]
        assert np.allclose(table, IRIS8_HAAR, atol=1e-6)
        assert run(["haar", "inverse", "--tree", tree, "--coeffs", str(coeffs), "--output", str(back)]) == 0
        assert np.allclose(io.read_table(back, id_column=True)[2], IRIS8, atol=1e-10)
        assert run(["haar", "regress", "--tree", tree, "--data", data, "--id-column", "--threshold", "10",
                    "--output", str(reg)]) == 0
        assert np.allclose(io.read_table(reg, id_column=True)[2], IRIS8_HAAR[:, 0])

    def test_row_mismatch(self, tmp_path, data_dir):
        assert run(["haar", "forward", "--tree", str(data_dir / "iris8_median_tree.json"),
                    "--data", str(data_dir / "iris7.csv"), "--id-column"]) == 4

    def test_malformed(self, bad_csv, data_dir):
        assert run(["haar", "forward", "--tree", str(data_dir / "iris8_median_tree.json"), "--data", str(bad_csv)]) == 3


class TestUmetry:
    def test_gaussian_row(self, tmp_path):
        out = tmp_path / "u.csv"
        assert run(["umetry", "--kind", "gaussian", "--dim", "20000", "--n", "100", "--triangles", "300",
                    "--seed", "7", "--output", str(out)]) == 0
        rows = read_csv_body(out)
        assert rows[0] == ["n_points", "dim", "isosceles", "equilateral", "ultrametric"]
        assert 0.93 <= float(rows[1][4]) <= 1.0

    def test_input_cloud(self, tmp_path, data_dir, capsys):
        assert run(["umetry", "--input", str(data_dir / "iris8.csv"), "--id-column", "--triangles", "50"]) == 0
        assert capsys.readouterr().out.splitlines()[-1].startswith("8,4,")

    def test_too_few_points(self, tmp_path):
        p = tmp_path / "two.csv"
        p.write_text("a\n1\n2\n")
        assert run(["umetry", "--input", str(p)]) == 4

    def test_malformed(self, bad_csv):
        assert run(["umetry", "--input", str(bad_csv)]) == 3


class TestSegment:
    def test_pipeline(self, tmp_path, signal_csv):
        out, hist, pc, bic = (tmp_path / n for n in ("s.json", "h.csv", "p.csv", "b.csv"))
        assert run(["segment", "--signal", str(signal_csv), "--window", "500", "--step", "500", "--segments",
                    "2", "--seed", "7", "--emit-histogram", str(hist), "--emit-pcoa", str(pc),
                    "--emit-bic", str(bic), "--k-max", "3", "--output", str(out), "--no-timestamp"]) == 0
        segs = json.loads(out.read_text())["segments"]
        assert segs == [
            {"window_first": 0, "window_last": 5, "sample_first": 0, "sample_last": 2999},
            {"window_first": 6, "window_last": 11, "sample_first": 3000, "sample_last": 5999},
        ]
        assert read_csv_body(hist)[0] == ["bin_lo", "bin_hi", "count"]
        assert read_csv_body(pc)[0] == ["window", "start", "segment", "axis_1", "axis_2"]
        assert csv_metadata(bic)["best_k"] >= 1

    def test_reruns_identical(self, tmp_path, signal_csv):
        outs = []
        for k in range(2):
            out = tmp_path / f"s{k}.csv"
            run(["segment", "--signal", str(signal_csv), "--window", "1000", "--step", "1000", "--segments", "2",
                 "--emit-bic", str(out), "--k-max", "2", "--no-timestamp", "--threads", "1"])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_window_overrun(self, signal_csv):
        assert run(["segment", "--signal", str(signal_csv), "--window", "7000", "--step", "10",
                    "--segments", "1"]) == 4

    def test_malformed(self, bad_csv):
        assert run(["segment", "--signal", str(bad_csv), "--window", "1", "--step", "1", "--segments", "1"]) == 3


class TestBench:
    def test_scaling(self, tmp_path):
        out = tmp_path / "b.csv"
        assert run(["bench", "--sizes", "200", "400", "--columns", "20", "--repeats", "1",
                    "--max-pairwise", "300", "--output", str(out)]) == 0
        rows = read_csv_body(out)
        assert rows[0] == ["n", "baire_seconds", "pairwise_seconds"]
        assert rows[2][2] == "NA"

    def test_kernels(self, tmp_path):
        out = tmp_path / "k.csv"
        assert run(["bench", "--mode", "kernels", "--sizes", "50", "--criteria", "single", "--repeats", "1",
                    "--output", str(out)]) == 0
        assert read_csv_body(out)[1][:2] == ["50", "single"]
