from pathlib import Path

import numpy as np
import pytest

from hazardlens.errors import EmptyMatrix
from hazardlens.importance import ImportanceVector, build_rank_matrix, overall_importance
from hazardlens.metrics import MetricTable
from hazardlens.report import (
    build_manifest,
    file_sha256,
    group_rollup,
    render_heatmap,
    write_performance_table,
    write_rows,
)
from hazardlens.transfer import TransferMatrix

GOLDEN = Path(__file__).parent / "golden"


def fixed_matrix():
    return TransferMatrix(
        axis="county", fixed_id="heat", ids=("east", "north", "west"),
        baseline="target_native", threshold=-15.0,
        delta={("east", "east"): 0.0, ("east", "north"): -22.5,
               ("east", "west"): 4.25, ("north", "east"): -8.75,
               ("north", "north"): 0.0, ("north", "west"): -15.0,
               ("west", "west"): 0.0},
        transferable={("east", "east"): True, ("east", "north"): False,
                      ("east", "west"): True, ("north", "east"): True,
                      ("north", "north"): True, ("north", "west"): True,
                      ("west", "west"): True},
    )


def test_heatmap_matches_golden_bytes():
    svg = render_heatmap(fixed_matrix())
    assert svg == (GOLDEN / "transfer_heatmap.svg").read_text("utf-8")


def test_heatmap_single_cell():
    matrix = TransferMatrix(
        axis="hazard", fixed_id="solo", ids=("heat",),
        baseline="target_native", threshold=-15.0,
        delta={("heat", "heat"): 0.0},
        transferable={("heat", "heat"): True},
    )
    svg = render_heatmap(matrix)
    assert svg.count("<rect") == 2  # hatch pattern swatch + the one cell
    assert ">0.00</text>" in svg


def test_heatmap_absent_cells_hatched_and_unlabeled():
    svg = render_heatmap(fixed_matrix())
    # two absent cells in the west row
    assert svg.count('fill="url(#hatch)"') == 2
    assert svg.count("</text>") == svg.count("text-anchor") + 2  # titles
    assert "-22.50" in svg and "-15.00" in svg


def test_heatmap_empty_matrix():
    matrix = TransferMatrix(axis="county", fixed_id="x", ids=(),
                            baseline="target_native", threshold=-15.0)
    with pytest.raises(EmptyMatrix):
        render_heatmap(matrix)


def test_performance_table_layout(tmp_path):
    counties = ("a", "b")
    hazards = ("flood", "heat")
    train = MetricTable(counties, hazards)
    test = MetricTable(counties, hazards)
    f1t = MetricTable(counties, hazards)
    fbt = MetricTable(counties, hazards)
    for county, f1v, fbv in (("a", 0.8, 0.82), ("b", 0.6, 0.64)):
        for hazard in hazards:
            train.set(county, hazard, 70)
            test.set(county, hazard, 30)
            f1t.set(county, hazard, f1v)
            fbt.set(county, hazard, fbv)
    path = tmp_path / "performance.csv"
    write_performance_table(path, counties, hazards, train, test, f1t, fbt, 1.5)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == (
        "county,train_flood,train_heat,test_flood,test_heat,"
        "f1_flood,f1_heat,fbeta1.5_flood,fbeta1.5_heat"
    )
    assert lines[1] == "a,70,70,30,30,80.00,80.00,82.00,82.00"
    assert lines[3] == "average,70,70,30,30,70.00,70.00,73.00,73.00"


def test_group_rollup_counts():
    names = tuple(f"f{j}" for j in range(6))
    vectors = {
        "c": ImportanceVector(
            feature_names=names,
            values=np.array([0.3, 0.25, 0.2, 0.15, 0.07, 0.03]),
            normalized=True,
        )
    }
    overall = overall_importance(build_rank_matrix(vectors), top_k=3)
    groups = {"f0": "social", "f1": "built", "f2": "social",
              "f3": "land", "f4": "built", "f5": "mobility"}
    rollup = group_rollup(overall, groups)
    assert rollup == {"built": 1, "social": 2}


def test_manifest_hashes_and_excludes_itself(tmp_path):
    write_rows(tmp_path / "x.csv", ["a"], [["1"]])
    (tmp_path / "manifest.json").write_text("{}", "utf-8")
    (tmp_path / "sub").mkdir()
    write_rows(tmp_path / "sub" / "y.csv", ["b"], [["2"]])
    manifest = build_manifest(tmp_path)
    assert sorted(manifest) == ["sub/y.csv", "x.csv"]
    assert manifest["x.csv"] == file_sha256(tmp_path / "x.csv")
