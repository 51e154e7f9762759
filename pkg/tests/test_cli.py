"""End-to-end CLI behavior: parsing, exit codes, reports, schemas, figures."""

import json
from importlib import resources

import jsonschema
import pytest

from pairml.cli import main, read_dataset_csv
from pairml.cli import InputError


def load_schema(name):
    with resources.files("pairml.schemas").joinpath(name).open() as fh:
        return json.load(fh)


def validate(payload, schema_name):
    jsonschema.validate(payload, load_schema(schema_name))


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    """A simulated 12x12 lattice SEM dataset written by the CLI itself."""
    path = tmp_path_factory.mktemp("fixture")
    rc = main([
        "simulate", "--rows", "12", "--cols", "12", "--beta", "1.0",
        "--sigma2", "1.0", "--lam", "0.5", "--seed", "3",
        "--output", str(path / "fixture"),
    ])
    assert rc == 0
    return path


class TestEstimateCommand:
    def test_round_trip_and_schema(self, fixture_dir, tmp_path):
        out = tmp_path / "est.json"
        rc = main([
            "estimate", "--input", str(fixture_dir / "fixture.csv"),
            "--graph", str(fixture_dir / "fixture.edges"),
            "--seed", "7", "--output", str(out),
        ])
        assert rc == 0
        payload = json.loads(out.read_text())
        validate(payload, "estimate_report.schema.json")
        assert payload["estimate"]["converged"]
        assert payload["centering"]["centered"]

    def test_lattice_flags_equivalent_to_edge_list(self, fixture_dir, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        common = ["estimate", "--input", str(fixture_dir / "fixture.csv"),
                  "--seed", "7"]
        assert main(common + ["--graph", str(fixture_dir / "fixture.edges"),
                              "--output", str(a)]) == 0
        assert main(common + ["--rows", "12", "--cols", "12",
                              "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_byte_identical_reruns(self, fixture_dir, tmp_path):
        a, b = tmp_path / "g1.json", tmp_path / "g2.json"
        args = ["estimate", "--input", str(fixture_dir / "fixture.csv"),
                "--rows", "12", "--cols", "12", "--seed", "42"]
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_seed_is_usage_error(self, fixture_dir, tmp_path, capsys):
        rc = main(["estimate", "--input", str(fixture_dir / "fixture.csv"),
                   "--rows", "12", "--cols", "12",
                   "--output", str(tmp_path / "x.json")])
        assert rc == 1
        assert "--seed" in capsys.readouterr().err

    def test_two_unit_psi_fixed_zero(self, tmp_path):
        csv_path = tmp_path / "two.csv"
        csv_path.write_text("id,y,x\n0,3.0,1.0\n1,4.0,2.0\n")
        out = tmp_path / "two.json"
        rc = main(["estimate", "--input", str(csv_path), "--rows", "1",
                   "--cols", "2", "--seed", "1", "--fix-psi-zero",
                   "--no-center", "--output", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        # beta = alpha3 / alpha1 = (1*3 + 2*4) / (1 + 4)
        assert payload["estimate"]["beta"][0] == pytest.approx(11.0 / 5.0)
        assert payload["estimate"]["psi"] == 0.0

    def test_figures_rendered(self, fixture_dir, tmp_path):
        figdir = tmp_path / "figs"
        rc = main(["estimate", "--input", str(fixture_dir / "fixture.csv"),
                   "--rows", "12", "--cols", "12", "--seed", "7",
                   "--output", str(tmp_path / "e.json"),
                   "--figures", str(figdir)])
        assert rc == 0
        assert (figdir / "psi_profile.png").stat().st_size > 0


class TestCsvParsing:
    def test_malformed_value_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,y,x\n0,1.0,2.0\n1,oops,3.0\n")
        with pytest.raises(InputError, match=":3"):
            read_dataset_csv(path)

    def test_missing_value_rejected(self, tmp_path):
        path = tmp_path / "na.csv"
        path.write_text("id,y,x\n0,nan,2.0\n1,1.0,3.0\n")
        with pytest.raises(InputError, match="missing value"):
            read_dataset_csv(path)

    def test_gap_in_unit_ids_rejected(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text("id,y,x\n0,1.0,2.0\n2,1.0,3.0\n")
        with pytest.raises(InputError, match="unit ids"):
            read_dataset_csv(path)

    def test_graph_size_mismatch_is_join_error(self, fixture_dir, tmp_path, capsys):
        rc = main(["estimate", "--input", str(fixture_dir / "fixture.csv"),
                   "--rows", "10", "--cols", "10", "--seed", "1",
                   "--output", str(tmp_path / "x.json")])
        assert rc == 1
        assert "dataset has 144" in capsys.readouterr().err


class TestMonteCarloCommand:
    def test_report_fields_and_schema(self, tmp_path):
        out = tmp_path / "mc.json"
        csv_out = tmp_path / "mc.csv"
        rc = main(["montecarlo", "--reps", "100", "--pairs", "100",
                   "--beta", "1.0", "--sigma2", "1.0", "--psi", "0.012",
                   "--seed", "5", "--output", str(out),
                   "--per-rep-csv", str(csv_out),
                   "--figures", str(tmp_path / "figs")])
        assert rc == 0
        payload = json.loads(out.read_text())
        validate(payload, "montecarlo_report.schema.json")
        report = payload["report"]
        for key in ("biases", "variances", "fisher_ratios"):
            assert key in report
        lines = csv_out.read_text().strip().splitlines()
        assert lines[0] == "index,beta1,sigma2,psi"
        assert len(lines) == 1 + report["replications"] - report["failures"]
        assert (tmp_path / "figs" / "montecarlo_estimates.png").exists()

    def test_reproducible(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["montecarlo", "--reps", "30", "--pairs", "50", "--psi", "0.3",
                "--seed", "8"]
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestBootstrapCommand:
    def test_single_coding_degenerate_and_schema(self, fixture_dir, tmp_path):
        out = tmp_path / "boot.json"
        rc = main(["bootstrap", "--input", str(fixture_dir / "fixture.csv"),
                   "--rows", "12", "--cols", "12", "--codings", "1",
                   "--seed", "9", "--output", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        validate(payload, "bootstrap_report.schema.json")
        assert all(s == 0.0 for s in payload["report"]["stds"])
        assert payload["besag_average"]["beta"] == payload["report"]["means"][:1]

    def test_many_codings_with_artifacts(self, fixture_dir, tmp_path):
        out = tmp_path / "boot.json"
        csv_out = tmp_path / "boot.csv"
        rc = main(["bootstrap", "--input", str(fixture_dir / "fixture.csv"),
                   "--rows", "12", "--cols", "12", "--codings", "10",
                   "--seed", "9", "--output", str(out),
                   "--estimates-csv", str(csv_out),
                   "--figures", str(tmp_path / "figs")])
        assert rc == 0
        payload = json.loads(out.read_text())
        validate(payload, "bootstrap_report.schema.json")
        assert (tmp_path / "figs" / "bootstrap_estimates.png").exists()
        assert len(csv_out.read_text().strip().splitlines()) >= 2


class TestSimulateCommand:
    def test_artifacts_and_schema(self, fixture_dir):
        payload = json.loads((fixture_dir / "fixture.json").read_text())
        validate(payload, "simulate_report.schema.json")
        lines = (fixture_dir / "fixture.csv").read_text().strip().splitlines()
        assert lines[0] == "id,y,x1"
        assert len(lines) == 1 + 144
        edges = (fixture_dir / "fixture.edges").read_text().strip().splitlines()
        assert len(edges) == 2 * 12 * 11  # rook edges of a 12x12 grid


class TestVerifyCommand:
    def test_synthetic_sample_agrees(self, tmp_path):
        out = tmp_path / "ver.json"
        rc = main(["verify", "--pairs", "50", "--beta", "1.0", "--sigma2",
                   "1.0", "--psi", "0.3", "--seed", "11",
                   "--output", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        validate(payload, "verify_report.schema.json")
        assert payload["agree"]
        assert payload["max_abs_difference"] <= payload["tolerance"]

    def test_dataset_input_agrees(self, fixture_dir, tmp_path):
        out = tmp_path / "ver.json"
        rc = main(["verify", "--input", str(fixture_dir / "fixture.csv"),
                   "--rows", "12", "--cols", "12", "--seed", "13",
                   "--output", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["agree"]
