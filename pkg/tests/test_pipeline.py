import csv
import json

import numpy as np
import pytest

from hazardlens.cli import main
from hazardlens.dataset import make_labeled
from hazardlens.errors import InvalidConfig
from hazardlens.metrics import MetricTable
from hazardlens.pipeline import RunConfig, compare_models, execute_job, run
from hazardlens.seeds import child_seed
from hazardlens.selection import SplitSpec, stratified_split


def tiny_config(out_dir, seed=5, workers=1, beta=1.5):
    return RunConfig(
        seed=seed,
        out_dir=str(out_dir),
        workers=workers,
        beta=beta,
        synth={
            "counties": [
                {"name": "ash", "n_tracts": 80, "hazards": ["heat", "flood"]},
                {"name": "oak", "n_tracts": 90, "hazards": ["heat", "flood"]},
                {"name": "yew", "n_tracts": 70, "hazards": ["heat"]},
            ],
            "n_features": 8,
            "informative_count": 3,
            "noise": 0.2,
        },
        forest_grid={"n_trees": [10], "max_depth": [4]},
        gbt_grid={"n_rounds": [8], "max_depth": [3], "learning_rate": [0.3],
                  "l2_reg": [1.0]},
        cv_k=5,
        top_k=3,
    )


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny") / "run"
    config = tiny_config(out)
    return run(config), out, config


def test_structure_and_absent_pairs(tiny_run):
    report, out, _ = tiny_run
    assert report.counties == ("ash", "oak", "yew")
    assert report.hazards == ("flood", "heat")
    assert report.absent == [("yew", "flood")]
    assert len(report.results) == 5
    assert not report.failures

    for rel in (
        "summary.json",
        "manifest.json",
        "reports/performance.csv",
        "reports/model_comparison.csv",
        "reports/dispersion.json",
        "reports/cv_table.csv",
        "reports/importance_heat.csv",
        "reports/overall_importance_heat.csv",
        "transfer/cross_county_heat.csv",
        "transfer/cross_county_heat.svg",
        "transfer/cross_hazard_ash.csv",
        "models/ash__heat__forest.json",
        "models/ash__heat__gbt.json",
        "data/ash.csv",
        "data/oracle.json",
    ):
        assert (out / rel).is_file(), rel

    summary = json.loads((out / "summary.json").read_text())
    assert summary["absent_pairs"] == [["yew", "flood"]]
    assert set(summary["pairs"]) == {
        "ash__flood", "ash__heat", "oak__flood", "oak__heat", "yew__heat"
    }
    # absent cell stays absent in the transfer matrix (never zero)
    rows = list(csv.DictReader((out / "transfer/cross_county_flood.csv").open()))
    yew_rows = [r for r in rows if "yew" in (r["source"], r["target"])]
    assert yew_rows and all(r["transferable"] == "absent" for r in yew_rows)


def test_rerun_same_seed_byte_identical(tiny_run, tmp_path):
    report, out, _ = tiny_run
    second = run(tiny_config(tmp_path / "again"))
    assert report.manifest == second.manifest
    for rel in report.manifest:
        assert (out / rel).read_bytes() == (tmp_path / "again" / rel).read_bytes()


def test_manifest_covers_every_written_file(tiny_run):
    report, out, _ = tiny_run
    on_disk = sorted(
        p.relative_to(out).as_posix()
        for p in out.rglob("*")
        if p.is_file() and p.name != "manifest.json"
    )
    assert sorted(report.manifest) == on_disk


def test_never_trains_on_test_rows(tiny_run):
    report, out, config = tiny_run
    for (county, hazard), res in report.results.items():
        ds_path = out / "data" / f"{county}.csv"
        from hazardlens.dataset import load_county_csv

        labeled = make_labeled(load_county_csv(ds_path), hazard)
        job_seed = child_seed(config.seed, "job", county, hazard)
        train, test = stratified_split(
            labeled, SplitSpec(seed=child_seed(job_seed, "split"))
        )
        assert set(train.tract_ids).isdisjoint(test.tract_ids)
        assert sorted(train.tract_ids + test.tract_ids) == sorted(labeled.tract_ids)
        assert test.tract_ids == res.test.tract_ids


def test_compare_models_matches_metric_csv(tiny_run):
    report, out, _ = tiny_run
    means = compare_models(report.fbeta_tables, report.hazards)
    for family in ("forest", "gbt"):
        by_hazard = {}
        with (out / f"reports/metrics_{family}_fbeta.csv").open() as handle:
            for row in csv.DictReader(handle):
                if row["fbeta"]:
                    by_hazard.setdefault(row["hazard"], []).append(float(row["fbeta"]))
        for hazard, values in by_hazard.items():
            assert means[family][hazard] == pytest.approx(
                sum(values) / len(values), abs=1e-12
            )
    # flood averages over the two counties holding flood data only
    assert len(by_hazard["flood"]) == 2


def test_beta_one_gives_equal_tables(tmp_path):
    report = run(tiny_config(tmp_path / "b1", beta=1.0))
    for family in ("forest", "gbt"):
        assert report.f1_tables[family].values == report.fbeta_tables[family].values


def test_full_eval_both_baselines_forest_only(tmp_path):
    config = RunConfig(
        seed=3,
        out_dir=str(tmp_path / "fb"),
        synth={
            "counties": [
                {"name": "ash", "n_tracts": 60, "hazards": ["heat"]},
                {"name": "oak", "n_tracts": 70, "hazards": ["heat"]},
            ],
            "n_features": 6,
            "informative_count": 2,
            "noise": 0.1,
        },
        families=["forest"],
        forest_grid={"n_trees": [8], "max_depth": [4]},
        cv_k=3,
        top_k=2,
        transfer_baseline="both",
        transfer_eval_on="full",
    )
    report = run(config)
    assert not report.failures
    out = tmp_path / "fb"
    for name in ("target_native", "source_native"):
        assert (out / f"transfer/cross_county_heat__{name}.csv").is_file()
        assert (out / f"transfer/cross_county_heat__{name}.svg").is_file()
    assert not (out / "models/ash__heat__gbt.json").exists()


def test_hazard_registry_restriction(tmp_path):
    config = tiny_config(tmp_path / "reg")
    config.hazards = ["heat"]
    report = run(config)
    assert report.hazards == ("heat",)
    assert all(h == "heat" for (_, h) in report.results)
    # flood data exists but is outside the registry: never an absent mark
    assert report.absent == []


def test_compare_models_constant_scores():
    counties, hazards = ("a", "b", "c"), ("heat",)
    table = MetricTable(counties, hazards)
    for county in counties:
        table.set(county, "heat", 0.77)
    means = compare_models({"forest": table}, hazards)
    assert means["forest"]["heat"] == pytest.approx(0.77, abs=1e-15)


def county_csv(path, seed, constant_hazard=False):
    gen = np.random.default_rng(seed)
    rows = []
    for i in range(40):
        x = gen.normal(size=3)
        hazard = 5.0 if constant_hazard else x[0] + 0.2 * gen.normal()
        rows.append([f"t{i:03d}", *[repr(float(v)) for v in x], repr(float(hazard))])
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["tract_id", "fa", "fb", "fc", "hazard__heat"])
        writer.writerows(rows)
    return path


def test_partial_failure_preserved(tmp_path):
    good = county_csv(tmp_path / "good.csv", seed=1)
    flat = county_csv(tmp_path / "flat.csv", seed=2, constant_hazard=True)
    other = county_csv(tmp_path / "other.csv", seed=3)
    config = RunConfig(
        seed=9,
        out_dir=str(tmp_path / "out"),
        county_files=[str(good), str(flat), str(other)],
        forest_grid={"n_trees": [5], "max_depth": [3]},
        gbt_grid={"n_rounds": [4], "max_depth": [2], "learning_rate": [0.3],
                  "l2_reg": [1.0]},
        cv_k=3,
        top_k=2,
    )
    report = run(config)
    assert len(report.failures) == 1
    assert report.failures[0]["county"] == "flat"
    assert report.failures[0]["error"] == "DegenerateLabels"
    assert ("good", "heat") in report.results  # partial results preserved
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["failures"][0]["county"] == "flat"


def test_config_validation():
    with pytest.raises(InvalidConfig):
        RunConfig(seed=None, out_dir="x", synth={"preset": "synth6x3"})
    with pytest.raises(InvalidConfig):
        RunConfig(seed=1, out_dir="x")  # no data source
    with pytest.raises(InvalidConfig):
        RunConfig(seed=1, out_dir="x", county_files=["/nope/missing.csv"])
    with pytest.raises(InvalidConfig):
        RunConfig(seed=1, out_dir="x", synth={}, families=["svm"])
    with pytest.raises(InvalidConfig):
        RunConfig(seed=1, out_dir="x", synth={}, workers=0)
    with pytest.raises(InvalidConfig):
        RunConfig(seed=1, out_dir="x", synth={}, transfer_threshold=5.0)


def test_cli_run_and_recompute(tmp_path, capsys):
    good = county_csv(tmp_path / "good.csv", seed=1)
    other = county_csv(tmp_path / "other.csv", seed=3)
    config = {
        "seed": 4,
        "out_dir": str(tmp_path / "out"),
        "counties": [str(good), str(other)],
        "cv": {
            "k": 3,
            "forest_grid": {"n_trees": [5], "max_depth": [3]},
            "gbt_grid": {"n_rounds": [4], "max_depth": [2],
                         "learning_rate": [0.3], "l2_reg": [1.0]},
        },
        "top_k": 2,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    assert main(["run", "--config", str(config_path)]) == 0
    out = capsys.readouterr().out
    assert "good/heat" in out

    run_dir = tmp_path / "out"
    assert main(["importance", "--run", str(run_dir)]) == 0
    recomputed = run_dir / "importance_recomputed" / "importance_heat.csv"
    assert recomputed.read_bytes() == (
        run_dir / "reports" / "importance_heat.csv"
    ).read_bytes()

    assert main(["transfer", "--run", str(run_dir)]) == 0
    again = run_dir / "transfer_recomputed" / "cross_county_heat.csv"
    assert again.read_bytes() == (
        run_dir / "transfer" / "cross_county_heat.csv"
    ).read_bytes()


def test_cli_partial_failure_exit_code(tmp_path):
    good = county_csv(tmp_path / "good.csv", seed=1)
    flat = county_csv(tmp_path / "flat.csv", seed=2, constant_hazard=True)
    other = county_csv(tmp_path / "other.csv", seed=3)
    config = {
        "seed": 9,
        "out_dir": str(tmp_path / "out"),
        "counties": [str(good), str(flat), str(other)],
        "cv": {
            "k": 3,
            "forest_grid": {"n_trees": [5], "max_depth": [3]},
            "gbt_grid": {"n_rounds": [4], "max_depth": [2],
                         "learning_rate": [0.3], "l2_reg": [1.0]},
        },
        "top_k": 2,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    assert main(["run", "--config", str(config_path)]) == 3


def test_cli_invalid_config_exit_code(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"out_dir": str(tmp_path / "o")}))
    assert main(["run", "--config", str(config_path)]) == 2
    assert main(["run"]) == 2


def test_cli_importance_literal_mode_partial_exit(tiny_run):
    # counties whose unweighted importance total is non-positive are skipped
    # and flagged through the partial-failure exit code
    report, out, _ = tiny_run
    from hazardlens.importance import forest_importance
    from hazardlens.pipeline import load_run_models

    models = load_run_models(out)
    nonpositive = [
        key
        for key, model in models.items()
        if key[2] == "forest"
        and forest_importance(model, "paper_literal").values.sum() <= 0
    ]
    code = main([
        "importance", "--run", str(out),
        "--out", str(out / "literal"), "--mode", "paper_literal",
    ])
    assert code == (3 if nonpositive else 0)


def test_cli_preset_assembles_config(tmp_path, monkeypatch):
    captured = {}

    def fake_run(config):
        captured["config"] = config
        from hazardlens.pipeline import RunReport

        return RunReport(
            out_dir=config.out_dir, counties=(), hazards=(), absent=[],
            failures=[], results={}, f1_tables={}, fbeta_tables={},
            comparison={}, dispersion={}, manifest={}, written=[],
        )

    monkeypatch.setattr("hazardlens.cli.run", fake_run)
    code = main([
        "run", "--preset", "synth6x3", "--seed", "3",
        "--out", str(tmp_path / "p"), "--workers", "2", "--beta", "1.0",
    ])
    assert code == 0
    config = captured["config"]
    assert config.seed == 3
    assert config.workers == 2
    assert config.beta == 1.0
    assert config.synth == {"preset": "synth6x3"}
    assert main(["run", "--preset", "synth6x3", "--seed", "1"]) == 2  # no --out


def test_cli_synth_emits_loadable_csvs(tmp_path):
    out = tmp_path / "scenario"
    assert main(["synth", "--seed", "3", "--out", str(out)]) == 0
    from hazardlens.dataset import load_county_csv

    files = sorted(out.glob("*.csv"))
    assert len(files) == 6
    ds = load_county_csv(files[0])
    assert ds.schema.feature_count == 35
    oracle = json.loads((out / "oracle.json").read_text())
    assert set(oracle) == {"alder", "birch", "cedar", "dogwood", "elm", "fir"}
    assert not (set(json.loads((out / "oracle.json").read_text())["elm"][
        "per_hazard_informative"
    ]) & {"air"})


def test_job_seed_independent_of_other_pairs(tiny_run):
    report, out, config = tiny_run
    from hazardlens.dataset import load_county_csv
    from hazardlens.pipeline import JobConfig

    ds = load_county_csv(out / "data" / "ash.csv")
    job_cfg = JobConfig(
        beta=config.beta,
        train_fraction=config.train_fraction,
        stratified=config.stratified,
        cv_k=config.cv_k,
        forest_grid=config.forest_grid,
        gbt_grid=config.gbt_grid,
        families=tuple(config.families),
        importance_mode=config.importance_mode,
    )
    solo = execute_job(ds, "heat", job_cfg, child_seed(config.seed, "job", "ash", "heat"))
    full = report.results[("ash", "heat")]
    assert solo.outcomes["forest"].model_json == full.outcomes["forest"].model_json
    assert solo.outcomes["gbt"].fbeta == full.outcomes["gbt"].fbeta