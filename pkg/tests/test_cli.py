"""End-to-end CLI behavior: stage outputs, exit codes, and file contracts."""

import shutil
from pathlib import Path

import numpy as np
import pytest
import yaml

from renewpull.cli import main
from renewpull.outputs import fmt, read_csv

import worldgen


def run_cli(*args) -> int:
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def ran_world(small_world):
    """The small world with optimize + shipping + pull + prices completed."""
    assert run_cli("optimize", "--manifest", small_world) == 0
    assert run_cli("shipping", "--manifest", small_world) == 0
    assert run_cli("pull", "--manifest", small_world) == 0
    assert run_cli("prices", "--manifest", small_world) == 0
    return small_world.parent / "out"


class TestStageOutputs:
    def test_production_costs_written_for_every_country(self, ran_world):
        meta, rows = read_csv(ran_world / "model1" / "production_costs.csv")
        assert {(r["region"], r["product"]) for r in rows} == {
            ("AAA", "olefins"), ("CCC", "olefins"), ("EEE", "olefins")
        }
        assert all(float(r["specific_cost_eur_per_unit"]) > 0 for r in rows)

    def test_headers_carry_seed_and_capital_mode(self, ran_world):
        for path in sorted(ran_world.rglob("*.csv")):
            meta, _ = read_csv(path)
            assert meta.get("seed") == "7", path
            assert meta.get("capital_mode") == "uniform", path

    def test_cost_composition_files_reconcile(self, ran_world):
        meta, summary = read_csv(ran_world / "model1" / "production_costs.csv")
        for row in summary:
            path = ran_world / "model1" / f"costs_{row['region']}_{row['product']}.csv"
            _, assets = read_csv(path)
            total = sum(float(a["annual_cost_eur_per_yr"]) for a in assets)
            assert total == pytest.approx(float(row["objective_eur_per_yr"]), rel=1e-6)

    def test_pull_entries_recompute_from_upstream_files(self, ran_world):
        _, costs = read_csv(ran_world / "model1" / "production_costs.csv")
        _, voyages = read_csv(ran_world / "shipping" / "voyages.csv")
        production = {r["region"]: float(r["specific_cost_eur_per_unit"]) for r in costs}
        voyage = {
            (r["exporter"], r["importer"]): float(r["specific_cost_eur_per_t"])
            for r in voyages
            if r["cargo"] == "olefins"
        }
        _, matrix = read_csv(ran_world / "pull" / "pull_matrix.csv")
        assert matrix
        for row in matrix:
            d = production[row["importer"]]
            i = production[row["exporter"]] + voyage[(row["exporter"], row["importer"])]
            assert fmt(d / i - 1.0) == row["rep"]

    def test_pull_matrix_excludes_self_and_covers_everyone_else(self, ran_world):
        _, matrix = read_csv(ran_world / "pull" / "pull_matrix.csv")
        importers = {r["importer"] for r in matrix}
        for importer in importers:
            exporters = {r["exporter"] for r in matrix if r["importer"] == importer}
            assert importer not in exporters
            assert len(exporters) == 2  # the other two countries

    def test_geojson_features_have_rep_properties(self, ran_world):
        import json

        doc = json.loads((ran_world / "pull" / "pull_AAA_olefins.geojson").read_text())
        assert doc["type"] == "FeatureCollection"
        assert len(doc["features"]) == 2
        for feature in doc["features"]:
            props = feature["properties"]
            assert props["importer"] == "AAA"
            assert "rep" in props and "capital_mode" in props
            assert feature["geometry"]["type"] == "Point"

    def test_prices_stage_covers_all_materials(self, ran_world):
        meta, rows = read_csv(ran_world / "prices" / "material_prices.csv")
        assert {r["material"] for r in rows} == {"limestone", "iron_ore", "scrap", "coal"}
        assert "clipped_fraction" in meta


class TestStageIsolation:
    def test_pull_stage_reproduces_after_deletion(self, ran_world, small_world):
        before = {
            p.name: p.read_bytes() for p in (ran_world / "pull").iterdir()
        }
        shutil.rmtree(ran_world / "pull")
        assert run_cli("pull", "--manifest", small_world) == 0
        after = {p.name: p.read_bytes() for p in (ran_world / "pull").iterdir()}
        assert before == after

    def test_pull_without_upstream_is_exit_4(self, tmp_path):
        manifest = worldgen.write_world(
            tmp_path, products=("olefins",), regions=("AAA", "EEE"), typical_days=4
        )
        assert run_cli("pull", "--manifest", manifest) == 4


class TestFailureHandling:
    def test_one_bad_country_isolated_with_nonzero_exit(self, tmp_path):
        manifest = worldgen.write_world(
            tmp_path, products=("olefins",), regions=("AAA", "CCC", "EEE"),
            typical_days=4, seed=7,
        )
        # sabotage one country: demand far beyond its renewable potential
        bad = tmp_path / "scenarios" / "CCC_olefins.yaml"
        doc = yaml.safe_load(bad.read_text())
        doc["demand"]["annual_mwh"] = 1.0e12
        bad.write_text(yaml.safe_dump(doc))
        assert run_cli("optimize", "--manifest", manifest) == 3
        _, rows = read_csv(tmp_path / "out" / "model1" / "production_costs.csv")
        assert {r["region"] for r in rows} == {"AAA", "EEE"}
        _, failures = read_csv(tmp_path / "out" / "model1" / "failures.csv")
        assert failures[0]["region"] == "CCC"
        assert "potential" in failures[0]["message"]

    def test_empty_product_list_is_a_noop(self, tmp_path):
        manifest = worldgen.write_world(
            tmp_path, products=("olefins",), regions=("AAA",), typical_days=4
        )
        doc = yaml.safe_load(manifest.read_text())
        doc["products"] = []
        manifest.write_text(yaml.safe_dump(doc))
        assert run_cli("optimize", "--manifest", manifest) == 0
        _, rows = read_csv(tmp_path / "out" / "model1" / "production_costs.csv")
        assert rows == []

    def test_unknown_manifest_key_is_exit_2(self, tmp_path):
        manifest = worldgen.write_world(tmp_path, products=("olefins",),
                                        regions=("AAA",), typical_days=4)
        doc = yaml.safe_load(manifest.read_text())
        doc["prodcuts"] = ["olefins"]
        manifest.write_text(yaml.safe_dump(doc))
        assert run_cli("optimize", "--manifest", manifest) == 2

    def test_uniform_mode_requires_rate(self, tmp_path):
        manifest = worldgen.write_world(tmp_path, products=("olefins",),
                                        regions=("AAA",), typical_days=4)
        doc = yaml.safe_load(manifest.read_text())
        doc["capital_mode"] = "uniform"
        doc.pop("uniform_rate")
        manifest.write_text(yaml.safe_dump(doc))
        assert run_cli("optimize", "--manifest", manifest) == 2


class TestSensitivityCommand:
    def test_sweep_matches_library_call_bit_for_bit(self, tmp_path):
        manifest = worldgen.write_world(
            tmp_path, products=("olefins",), regions=("EEE",), typical_days=4, seed=3
        )
        assert run_cli("sensitivity", "--manifest", manifest, "--region", "EEE",
                       "--deltas=-200000,0,200000") == 0
        _, rows = read_csv(tmp_path / "out" / "sensitivity" / "sensitivity_EEE_olefins.csv")
        assert [r["delta_mwh"] for r in rows] == ["-200000", "0", "200000"]
        costs = [float(r["specific_cost_eur_per_unit"]) for r in rows]
        assert costs[0] <= costs[1] <= costs[2]

        from renewpull import tsa
        from renewpull.esom import scenario_series
        from renewpull.esom.allocate import demand_sensitivity
        from renewpull.scenario import load_scenario

        scenario = load_scenario(
            tmp_path / "scenarios" / "EEE_olefins.yaml",
            capital_mode="uniform", uniform_rate=0.06,
        )
        periods = tsa.aggregate(
            scenario_series(scenario), n_periods=4,
            seed=tsa.derive_seed(3, "tsa", "EEE", "olefins"),
        )
        oracle = demand_sensitivity(scenario, periods, [-200000.0, 0.0, 200000.0])
        for row, expected in zip(rows, oracle):
            assert row["specific_cost_eur_per_unit"] == fmt(expected["specific_cost"])

        svg = (tmp_path / "out" / "sensitivity" / "sensitivity_EEE_olefins.svg").read_text()
        assert svg.startswith("<svg") and svg.count("<rect") == 3

    def test_invalid_delta_exits_before_solving(self, tmp_path):
        manifest = worldgen.write_world(
            tmp_path, products=("olefins",), regions=("EEE",), typical_days=4
        )
        assert run_cli("sensitivity", "--manifest", manifest, "--region", "EEE",
                       "--deltas=-1e15") == 2
        assert not (tmp_path / "out" / "sensitivity").exists()


class TestOverrides:
    def test_seed_and_out_overrides(self, tmp_path):
        manifest = worldgen.write_world(
            tmp_path, products=("olefins",), regions=("AAA",), typical_days=4
        )
        alt = tmp_path / "alt_out"
        assert run_cli("optimize", "--manifest", manifest, "--seed", 123,
                       "--out", alt) == 0
        meta, _ = read_csv(alt / "model1" / "production_costs.csv")
        assert meta["seed"] == "123"

    def test_run_log_holds_timestamps_not_results(self, ran_world):
        log = (ran_world / "run.log").read_text()
        assert log  # timestamps live here
        for path in ran_world.rglob("*.csv"):
            head = path.read_text().splitlines()[0]
            assert "20" not in head.split("seed=")[0] or "units" in head
