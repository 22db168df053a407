import csv
import json

import pytest

from inner_clt.command_handler import (get_command, parse_config, parse_config_text,
                                       process_command)
from inner_clt.errors import ConfigError
from inner_clt.run_manager import RunManager


def _run(tmp_path, command, text):
    parsed = parse_config_text(text, command)
    manager = RunManager(command, str(tmp_path), parsed.digest, seed=parsed.seed,
                         sampling=parsed.settings.get("sampling"))
    result = process_command(command, parsed, manager)
    return result, manager.finish()


class TestParsing:
    def test_defaults(self):
        parsed = parse_config_text("schema_version: 1\n", "clt")
        assert parsed.settings["N"] == 400
        assert parsed.experiment.N == (400,)
        assert parsed.experiment.sampling.kind == "grid"
        assert abs(parsed.product.multiplier - 0.5) < 1e-12

    def test_explicit_product(self):
        text = "schema_version: 1\nproduct:\n  phase_angle: 0.0\n  zeros: [[0, 0], [0, 0.5]]\n"
        parsed = parse_config_text(text, "clark")
        assert abs(parsed.product.multiplier - 0.5) < 1e-12

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match="unknown key 'foo'") as info:
            parse_config_text("schema_version: 1\nproduct: half\nfoo: 3\n", "clt")
        assert info.value.line == 3
        assert info.value.path == "foo"

    def test_nested_unknown_key(self):
        text = "schema_version: 1\nsampling:\n  kind: mc\n  bogus: 1\n"
        with pytest.raises(ConfigError, match="unknown key 'bogus'") as info:
            parse_config_text(text, "clt")
        assert info.value.path == "sampling.bogus"
        assert info.value.line == 4

    def test_zero_outside_disk(self):
        text = "schema_version: 1\nproduct:\n  zeros: [[0, 0], [1.5, 0]]\n"
        with pytest.raises(ConfigError, match="zero outside open disk") as info:
            parse_config_text(text, "clark")
        assert info.value.path == "product.zeros"
        assert info.value.line == 3

    def test_divergent_tail(self):
        with pytest.raises(ConfigError, match="divergent sequence for tail mode"):
            parse_config_text("schema_version: 1\nsequence: constant\n", "tails")

    def test_rotation_rejected_for_harness(self):
        text = "schema_version: 1\nproduct:\n  zeros: [[0, 0]]\n"
        with pytest.raises(ConfigError, match="not a rotation"):
            parse_config_text(text, "clt")

    @pytest.mark.parametrize("text", ["N: 10\n", "schema_version: 2\n"])
    def test_schema_version(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text, "blocks")

    def test_invalid_yaml(self):
        with pytest.raises(ConfigError, match="not valid YAML"):
            parse_config_text("schema_version: 1\nN: [1,\n", "blocks")

    def test_wrong_type(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("schema_version: 1\nN: many\n", "blocks")
        assert info.value.path == "N"

    def test_unknown_catalog_entry(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("schema_version: 1\nproducts: [half, heptic]\n", "verify")
        assert info.value.path == "products.1"

    def test_sampling_overrides(self):
        parsed = parse_config_text("schema_version: 1\n", "clt", {"grid": 5000, "seed": 3})
        assert parsed.experiment.sampling == parsed.experiment.sampling.__class__(
            kind="grid", M=5000, seed=3)
        mc = parse_config_text("schema_version: 1\n", "clt", {"mc_samples": 2000})
        assert (mc.experiment.sampling.kind, mc.experiment.sampling.M) == ("mc", 2000)

    def test_digest_ignores_key_order_and_overrides(self):
        one = parse_config_text("schema_version: 1\nN: 10000\nphi: 0.0001\n", "blocks")
        two = parse_config_text("phi: 0.0001\nschema_version: 1\nN: 10000\n", "blocks",
                                {"seed": 5})
        assert one.digest == two.digest

    def test_missing_config_file_means_defaults(self):
        assert parse_config(None, "blocks").settings["N"] == 10_000

    def test_unreadable_config(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            parse_config(tmp_path / "missing.yaml", "blocks")

    def test_unknown_command(self):
        with pytest.raises(ValueError, match="Invalid command"):
            get_command("plot")


class TestProcessCommand:
    def test_clark(self, tmp_path):
        rows, manifest = _run(tmp_path, "clark",
                              "schema_version: 1\nn_alpha: 16\nl_max: 4\nm_max: 3\n")
        assert manifest.ok and manifest.passed == len(rows)
        atoms = (tmp_path / "clark.csv").read_text().splitlines()
        assert atoms[0] == "alpha_re,alpha_im,atom_re,atom_im,weight"
        assert len(atoms) == 1 + 16 * 2

    def test_verify_runs_the_default_products(self, tmp_path, monkeypatch):
        from inner_clt import command_handler
        from inner_clt.inner_core import make_blaschke

        monkeypatch.setattr(command_handler.catalog, "default_products",
                            lambda: [("only", make_blaschke(1.0, [0, 0.5]))])
        text = "schema_version: 1\nn_max: 3\nn_alpha: 8\nl_max: 3\nm_max: 2\n"
        rows, manifest = _run(tmp_path, "verify", text)
        assert manifest.ok, [r for r in rows if not r["pass"]]
        assert rows and all(r["name"].startswith("only: ") for r in rows)

    def test_blocks(self, tmp_path):
        report, manifest = _run(tmp_path, "blocks", "schema_version: 1\nN: 1000\nphi: 0.001\n")
        assert report.passed and manifest.ok
        lines = (tmp_path / "blocks.csv").read_text().splitlines()
        assert lines[1:] == ["1,A,1,422,422,422", "1,B,423,453,31,31"]
        assert "blocks_invariants.csv" in manifest.outputs
        text = (tmp_path / "blocks_summary.csv").read_text()
        summary = next(csv.DictReader(text.splitlines()))
        assert summary["S_N2"] == "1000"
        assert float(summary["sigma_N2"]) > 1000
        assert summary["growth_ratio"] != ""

    def test_correlations(self, tmp_path):
        text = ("schema_version: 1\nN: 6\nn_max: 4\n"
                "decay:\n  k: 2\n  signs: [-1, 1]\n  q_values: [1, 2, 3, 4]\n")
        rows, manifest = _run(tmp_path, "correlations", text)
        assert manifest.ok, [r for r in rows if not r["pass"]]
        assert rows[-1]["name"].startswith("decay k=2")

    def test_clt_sweep(self, tmp_path):
        text = "schema_version: 1\nN: [4, 8]\nsampling:\n  kind: grid\n  M: 4096\n"
        report, manifest = _run(tmp_path, "clt", text)
        assert manifest.outputs[:3] == ["samples.csv", "report.json", "cf_curve.csv"]
        assert "sweep.csv" in manifest.outputs
        data = json.loads((tmp_path / "report.json").read_text())
        assert data["metadata"]["N"] == 8
        assert [0.5, 0.0] in data["metadata"]["product"]["zeros"]
        assert data["verdict"] == report.verdict
        assert len((tmp_path / "samples.csv").read_text().splitlines()) == 4097

    def test_optimality(self, tmp_path):
        text = "schema_version: 1\nN: [20]\nsampling:\n  kind: mc\n  M: 2000\n  seed: 1\n"
        rows, _ = _run(tmp_path, "optimality", text)
        assert rows[0].N == 20
        assert rows[0].max_modulus <= rows[0].modulus_bound * (1 + 1e-12)
        assert (tmp_path / "optimality.csv").exists()

    def test_unknown_command(self, tmp_path):
        parsed = parse_config_text("schema_version: 1\n", "blocks")
        with pytest.raises(ValueError):
            process_command("plot", parsed, RunManager("plot", str(tmp_path), parsed.digest))
