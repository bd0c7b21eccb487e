import json

import numpy as np
import pytest

from timelens import gen_periodic_ssm
from timelens.cli import main

from conftest import EXAMPLE_Z

PAPER_CSV = "1,10\n2,20\n3,30\n4,40\n"


@pytest.fixture
def paper_csv(tmp_path):
    path = tmp_path / "paper.csv"
    path.write_text(PAPER_CSV)
    return path


@pytest.fixture
def sinusoid_csv(tmp_path):
    out = gen_periodic_ssm(theta=2 * np.pi / 12, q_sd=0.0, r_sd=0.0, T=240, seed=0)
    path = tmp_path / "sin.csv"
    path.write_text("\n".join(repr(float(v)) for v in out.series.values.ravel()) + "\n")
    return path


def read_csv_matrix(path):
    lines = path.read_text().strip().splitlines()
    if lines and not lines[0][0].isdigit() and not lines[0].startswith("-"):
        lines = lines[1:]
    return np.array([[float(x) for x in line.split(",")] for line in lines])


class TestEmbed:
    def test_paper_example_dump_and_comparison(self, paper_csv, tmp_path):
        out = tmp_path / "out"
        code = main(["embed", "--input", str(paper_csv), "-L", "2", "--rank", "2", "--output-dir", str(out)])
        assert code == 0
        z = read_csv_matrix(out / "trajectory.csv")
        assert np.array_equal(z, EXAMPLE_Z)
        comparison = json.loads((out / "comparison.json").read_text())
        assert comparison["residual"] < 1e-8
        emb = json.loads((out / "embedding.json").read_text())
        assert emb["L"] == 2 and emb["r"] == 2 and len(emb["coords"]) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "embed" and "version" in manifest

    def test_window_equals_length_single_row(self, paper_csv, tmp_path):
        out = tmp_path / "out"
        assert main(["embed", "--input", str(paper_csv), "-L", "4", "--rank", "1", "--output-dir", str(out)]) == 0
        emb = json.loads((out / "embedding.json").read_text())
        assert len(emb["coords"]) == 1

    def test_methods_agree(self, sinusoid_csv, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for method, out in (("timecluster", out_a), ("subspace", out_b)):
            code = main(
                ["embed", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2", "--method", method, "--output-dir", str(out)]
            )
            assert code == 0
        for out in (out_a, out_b):
            comparison = json.loads((out / "comparison.json").read_text())
            assert comparison["residual"] < 1e-8

    def test_missing_input_exit_2(self, tmp_path):
        assert main(["embed", "--input", str(tmp_path / "nope.csv"), "-L", "2", "--output-dir", str(tmp_path)]) == 2

    def test_identical_manifests_identical_bytes(self, sinusoid_csv, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["embed", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2"]
        assert main(args + ["--output-dir", str(out_a)]) == 0
        assert main(args + ["--output-dir", str(out_b)]) == 0
        for name in ("embedding.csv", "embedding.json", "singular_values.csv", "trajectory.csv", "comparison.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_subspace_with_stride_rejected(self, sinusoid_csv, tmp_path):
        code = main(
            ["embed", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2", "--stride", "2",
             "--method", "subspace", "--output-dir", str(tmp_path / "o")]
        )
        assert code == 1

    def test_strided_embedding_row_count(self, sinusoid_csv, tmp_path):
        out = tmp_path / "o"
        assert main(["embed", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2", "--stride", "3", "--output-dir", str(out)]) == 0
        emb = json.loads((out / "embedding.json").read_text())
        assert len(emb["coords"]) == (240 - 6) // 3 + 1


class TestGenerate:
    def test_ar2_outputs(self, tmp_path):
        out = tmp_path / "gen"
        code = main(
            ["generate", "--kind", "ar2", "--length", "100", "--seed", "5", "--noise-sd", "0.1", "--output-dir", str(out)]
        )
        assert code == 0
        series = read_csv_matrix(out / "series.csv")
        assert series.shape == (100, 1)
        states = read_csv_matrix(out / "states.csv")
        assert states.shape == (100, 2)
        spec = json.loads((out / "spec.json").read_text())
        assert spec["seed"] == 5

    def test_generate_reproducible(self, tmp_path):
        args = ["generate", "--kind", "periodic-ssm", "--theta", "0.4", "--length", "50", "--seed", "3", "--noise-sd", "0.2"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--output-dir", str(a)]) == 0
        assert main(args + ["--output-dir", str(b)]) == 0
        assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()

    def test_exogenous_writes_inputs(self, tmp_path):
        out = tmp_path / "gen"
        code = main(
            ["generate", "--kind", "exogenous-stepped", "--length", "100", "--schedule", "0:50:0.0;50:100:1.0", "--output-dir", str(out)]
        )
        assert code == 0
        assert read_csv_matrix(out / "inputs.csv").shape == (100, 1)


class TestIdentify:
    def test_periodic_model_json(self, tmp_path, sinusoid_csv):
        out = tmp_path / "out"
        code = main(["identify", "--input", str(sinusoid_csv), "-L", "4", "--epsilon", "1e-6", "--output-dir", str(out)])
        assert code == 0
        model = json.loads((out / "model.json").read_text())
        assert model["n"] == 2
        assert len(model["A"]) == 2
        states = read_csv_matrix(out / "states.csv")
        assert states.shape == (240 - 4 + 1, 2)

    def test_zero_inputs_file_matches_output_only(self, tmp_path, sinusoid_csv):
        zeros = tmp_path / "zeros.csv"
        zeros.write_text("\n".join(["0.0"] * 240) + "\n")
        out_u = tmp_path / "with-u"
        out_o = tmp_path / "without-u"
        base = ["identify", "--input", str(sinusoid_csv), "-L", "4", "--rank", "2"]
        with pytest.warns(UserWarning):
            assert main(base + ["--inputs", str(zeros), "--output-dir", str(out_u)]) == 0
        assert main(base + ["--output-dir", str(out_o)]) == 0
        mu = json.loads((out_u / "model.json").read_text())
        mo = json.loads((out_o / "model.json").read_text())
        assert mu["A"] == mo["A"] and mu["C"] == mo["C"] and mu["Q"] == mo["Q"] and mu["R"] == mo["R"]

    def test_missing_inputs_file_exit_2(self, tmp_path, sinusoid_csv):
        code = main(
            ["identify", "--input", str(sinusoid_csv), "--inputs", str(tmp_path / "ghost.csv"), "-L", "4",
             "--output-dir", str(tmp_path / "o")]
        )
        assert code == 2


class TestForecast:
    def test_sinusoid_period_return(self, tmp_path, sinusoid_csv):
        out = tmp_path / "fc"
        code = main(
            ["forecast", "--input", str(sinusoid_csv), "-L", "6", "--epsilon", "1e-6", "--horizon", "13", "--output-dir", str(out)]
        )
        assert code == 0
        table = read_csv_matrix(out / "forecast.csv")
        assert table.shape[0] == 13
        # period 12: prediction 13 equals prediction 1
        assert abs(table[12, 1] - table[0, 1]) < 1e-6

    def test_eval_metrics(self, tmp_path, sinusoid_csv):
        out = tmp_path / "fc"
        code = main(
            ["forecast", "--input", str(sinusoid_csv), "-L", "6", "--epsilon", "1e-6", "--horizon", "2",
             "--eval", "--start", "120", "--refit-every", "30", "--output-dir", str(out)]
        )
        assert code == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["one_step_ahead"]["rmse"] < 1e-6
        assert metrics["one_step_ahead"]["persistence_rmse"] > 1e-3

    def test_zero_horizon_rejected(self, tmp_path, sinusoid_csv):
        code = main(["forecast", "--input", str(sinusoid_csv), "-L", "6", "--horizon", "0", "--output-dir", str(tmp_path / "o")])
        assert code == 1

    def test_saved_model_loadable(self, tmp_path, sinusoid_csv):
        id_dir = tmp_path / "id"
        assert main(["identify", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2", "--output-dir", str(id_dir)]) == 0
        fresh = tmp_path / "fc-model"
        refit = tmp_path / "fc-refit"
        base = ["forecast", "--input", str(sinusoid_csv), "-L", "6", "--horizon", "5"]
        assert main(base + ["--model", str(id_dir / "model.json"), "--output-dir", str(fresh)]) == 0
        assert main(base + ["--rank", "2", "--output-dir", str(refit)]) == 0
        a = read_csv_matrix(fresh / "forecast.csv")
        b = read_csv_matrix(refit / "forecast.csv")
        assert np.abs(a - b).max() < 1e-9

    def test_missing_model_file_exit_2(self, tmp_path, sinusoid_csv):
        code = main(
            ["forecast", "--input", str(sinusoid_csv), "-L", "6", "--horizon", "2",
             "--model", str(tmp_path / "ghost.json"), "--output-dir", str(tmp_path / "o")]
        )
        assert code == 2


class TestSmooth:
    def test_noise_free_smooth_runs(self, tmp_path, sinusoid_csv):
        out = tmp_path / "sm"
        code = main(["smooth", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2", "--output-dir", str(out)])
        assert code == 0
        emb = json.loads((out / "smoothed.json").read_text())
        assert emb["source"] == "smoothed"
        assert len(emb["coords"]) == 240 - 6 + 1

    def test_empty_input_errors(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert main(["smooth", "--input", str(empty), "-L", "2", "--output-dir", str(tmp_path / "o")]) == 1


class TestCompare:
    def test_ar2_run_residual(self, tmp_path):
        gen_dir = tmp_path / "gen"
        assert main(
            ["generate", "--kind", "ar2", "--length", "500", "--seed", "1", "--noise-sd", "0.1", "--output-dir", str(gen_dir)]
        ) == 0
        out = tmp_path / "cmp"
        code = main(["compare", "--input", str(gen_dir / "series.csv"), "-L", "2", "--rank", "2", "--output-dir", str(out)])
        assert code == 0
        report = json.loads((out / "alignment.json").read_text())
        assert report["residual"] < 1e-8

    def test_identical_files_zero_residual(self, tmp_path, sinusoid_csv):
        emb_dir = tmp_path / "emb"
        assert main(["embed", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2", "--output-dir", str(emb_dir)]) == 0
        out = tmp_path / "cmp"
        code = main(
            ["compare", "--a", str(emb_dir / "embedding.csv"), "--b", str(emb_dir / "embedding.csv"), "--output-dir", str(out)]
        )
        assert code == 0
        report = json.loads((out / "alignment.json").read_text())
        assert report["residual"] < 1e-14

    def test_shape_mismatch_errors(self, tmp_path, sinusoid_csv):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        assert main(["embed", "--input", str(sinusoid_csv), "-L", "6", "--rank", "2", "--output-dir", str(a_dir)]) == 0
        assert main(["embed", "--input", str(sinusoid_csv), "-L", "6", "--rank", "1", "--output-dir", str(b_dir)]) == 0
        code = main(
            ["compare", "--a", str(a_dir / "embedding.csv"), "--b", str(b_dir / "embedding.csv"), "--output-dir", str(tmp_path / "o")]
        )
        assert code == 1
