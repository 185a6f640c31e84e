import json
import math

import numpy as np
import pytest

from subwavebands.cli import main


def read_table(path):
    metadata, header, rows = {}, None, []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition("=")
                metadata[key] = value
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append(line.split(","))
    return metadata, header, rows


class TestBand1D:
    def test_fig2a_schema_and_anchor(self, tmp_path):
        out = tmp_path / "fig2a.csv"
        assert main(["band1d", "--preset", "fig2a", "--out", str(out)]) == 0
        metadata, header, rows = read_table(out)
        assert metadata["preset"] == "fig2a"
        assert metadata["spacings"] == "[0.6]"
        assert header == ["alpha", "beta", "branch", "omega"]
        bulk_max = max(float(r[3]) for r in rows if float(r[1]) == 0.0)
        assert math.isclose(bulk_max, 0.81650, abs_tol=5e-6)

    def test_custom_args(self, tmp_path):
        out = tmp_path / "custom.csv"
        code = main(["band1d", "--s1", "0.5", "--s2", "1.5", "--delta", "0.2",
                     "--alpha-samples", "21", "--gap-samples", "11", "--out", str(out)])
        assert code == 0
        _, _, rows = read_table(out)
        assert rows

    def test_validation_exit_code(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            main(["band1d", "--s1", "-1", "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2
        assert "s1" in capsys.readouterr().err

    def test_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["band1d", "--s1", "0.6", "--alpha-samples", "31", "--gap-samples", "11"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestGap1D:
    def test_branches_and_metadata(self, tmp_path):
        out = tmp_path / "gap1d.csv"
        assert main(["gap1d", "--s1", "1", "--s2", "2", "--length", "1",
                     "--delta", "0.001", "--gap-samples", "21", "--out", str(out)]) == 0
        metadata, header, rows = read_table(out)
        assert math.isclose(float(metadata["beta_max"]), math.log(2.0) / 5.0, rel_tol=1e-12)
        branches = {int(r[2]) for r in rows}
        assert branches == {1, 2, 3, 4}


class TestTransfer:
    def test_fig3_preset(self, tmp_path):
        out = tmp_path / "fig3a.csv"
        assert main(["transfer", "--preset", "fig3a", "--out", str(out)]) == 0
        metadata, header, rows = read_table(out)
        assert header == ["k", "branch", "alpha", "beta", "in_gap"]
        assert float(metadata["cell_length"]) == 1.4
        assert any(r[4] == "1" for r in rows)  # gaps present


class TestSsh:
    def test_fig5_json_report(self, tmp_path):
        out = tmp_path / "fig5.json"
        assert main(["ssh", "--preset", "fig5", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        results = payload["results"]
        assert abs(results["predicted_beta"] - 0.1154) < 5e-4
        assert abs(results["omega"] - 0.0349174) < 1e-4
        assert len(results["mode"]) == 41
        assert payload["diagnostics"]["interface_index"] == 20

    def test_fig5_csv(self, tmp_path):
        out = tmp_path / "fig5.csv"
        assert main(["ssh", "--preset", "fig5", "--format", "csv", "--out", str(out)]) == 0
        metadata, header, rows = read_table(out)
        assert header == ["resonator", "cell", "amplitude", "envelope"]
        assert len(rows) == 41
        assert "predicted_beta" in metadata


class TestGreens:
    def test_fit_metadata(self, tmp_path):
        out = tmp_path / "gc.csv"
        assert main(["greens-convergence", "--n-list", "2", "4", "8",
                     "--n-ref", "64", "--out", str(out)]) == 0
        metadata, header, rows = read_table(out)
        assert header == ["n", "error"]
        assert len(rows) == 3
        assert 2.0 < float(metadata["fitted_order"]) < 4.0

    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        # exact Rayleigh point: alpha = (pi, pi), k = 0, beta on the diagonal
        beta = math.sqrt(2.0) * math.pi / math.sqrt(2.0)
        code = main([
            "greens-convergence", "--alpha", str(math.pi), str(math.pi),
            "--beta", str(beta), str(beta), "--k", "0",
            "--n-list", "2", "4", "--n-ref", "16", "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 3
        assert "RayleighSingular" in capsys.readouterr().err

    def test_reference_validation(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["greens-convergence", "--n-list", "2", "64", "--n-ref", "32",
                  "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2


class TestScan2D:
    def test_small_scan(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = main(["scan2d", "--radius", "0.005", "--t-min", "3.5", "--t-max", "5.5",
                     "--t-samples", "60", "--out", str(out)])
        assert code == 0
        metadata, header, rows = read_table(out)
        assert header == ["t", "cond_raw", "cond_equilibrated", "lambda_max_abs"]
        flagged = json.loads(metadata["flagged"])
        assert any(
            h["kind"] == "rayleigh_pole" and abs(h["t"] - math.sqrt(2) * math.pi) < 1e-3
            for h in flagged
        )


class TestParser:
    def test_preset_subcommand_mismatch(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["band1d", "--preset", "fig5", "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2

    def test_threads_validation(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["band1d", "--s1", "0.6", "--threads", "0", "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2

    def test_band2d_requires_preset(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["band2d", "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2
