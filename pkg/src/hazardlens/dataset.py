"""Domain types, CSV ingestion, and mean-threshold risk labeling.

The ingestion contract is deliberately narrow: UTF-8 CSV with a header row,
a mandatory ``tract_id`` column, hazard exposure columns named
``hazard__<id>``, and every remaining column treated as a numeric feature.
Exposure vectors are binarized at the county mean: strictly above the mean
is high-risk, everything else (ties included) is low-risk.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateLabels,
    DuplicateTract,
    EmptyVector,
    HazardAbsent,
    MissingColumn,
    NonFiniteValue,
    NonNumericCell,
    SchemaMismatch,
)

LOW = 0
HIGH = 1

HAZARD_PREFIX = "hazard__"
TRACT_COLUMN = "tract_id"


@dataclass(frozen=True)
class FeatureSchema:
    """Canonical ordered feature list shared by every county in a run."""

    feature_names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.feature_names)
        object.__setattr__(self, "feature_names", names)
        if len(names) < 2:
            raise SchemaMismatch(f"need at least 2 features, got {len(names)}")
        if len(set(names)) != len(names):
            raise SchemaMismatch("feature names must be unique")

    @property
    def feature_count(self) -> int:
        return len(self.feature_names)

    def fingerprint(self) -> str:
        """Stable digest of the ordered feature names."""
        joined = "\x1f".join(self.feature_names)
        return hashlib.sha256(joined.encode("utf-8")).hexdigest()

    def index_of(self, name: str) -> int:
        return self.feature_names.index(name)


@dataclass
class CountyDataset:
    """One county's tract-level feature matrix and raw hazard exposures.

    ``hazards`` maps hazard id to an exposure vector aligned with the rows;
    NaN entries mark tracts with no recorded exposure for that hazard, and
    a missing key marks a hazard with no data for the county at all.
    Instances are treated as read-only once a run's schemas are aligned.
    """

    county_id: str
    schema: FeatureSchema
    tract_ids: tuple[str, ...]
    features: np.ndarray
    hazards: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.tract_ids = tuple(self.tract_ids)
        self.features = np.asarray(self.features, dtype=np.float64)
        n = len(self.tract_ids)
        if self.features.shape != (n, self.schema.feature_count):
            raise SchemaMismatch(
                f"feature matrix shape {self.features.shape} does not match "
                f"{n} tracts x {self.schema.feature_count} features",
                county=self.county_id,
            )
        if len(set(self.tract_ids)) != n:
            raise DuplicateTract(f"duplicate tract_id in county {self.county_id!r}")
        for hazard_id, values in self.hazards.items():
            values = np.asarray(values, dtype=np.float64)
            if values.shape != (n,):
                raise SchemaMismatch(
                    f"hazard {hazard_id!r} has {values.shape[0]} values for {n} tracts",
                    county=self.county_id,
                )
            self.hazards[hazard_id] = values

    @property
    def n(self) -> int:
        return len(self.tract_ids)

    def hazard_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.hazards))


@dataclass
class LabeledDataset:
    """Feature matrix plus high/low labels for one (county, hazard) pair."""

    county_id: str
    hazard_id: str
    schema: FeatureSchema
    tract_ids: tuple[str, ...]
    features: np.ndarray
    labels: np.ndarray
    threshold: float

    def __post_init__(self):
        self.tract_ids = tuple(self.tract_ids)
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape[0] != self.features.shape[0]:
            raise SchemaMismatch("labels and features disagree on row count")

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def class_counts(self) -> tuple[int, int]:
        """(low, high) label counts."""
        high = int(np.sum(self.labels == HIGH))
        return self.n - high, high

    def take(self, indices: np.ndarray) -> "LabeledDataset":
        """Row subset preserving the given index order."""
        indices = np.asarray(indices, dtype=np.intp)
        return LabeledDataset(
            county_id=self.county_id,
            hazard_id=self.hazard_id,
            schema=self.schema,
            tract_ids=tuple(self.tract_ids[i] for i in indices),
            features=self.features[indices],
            labels=self.labels[indices],
            threshold=self.threshold,
        )


def binarize(exposure) -> tuple[np.ndarray, float]:
    """Split an exposure vector at its arithmetic mean.

    Returns (labels, threshold) where a label is HIGH iff the value is
    strictly greater than the mean; ties at the mean go to LOW.
    """
    values = np.asarray(exposure, dtype=np.float64)
    if values.size == 0:
        raise EmptyVector("cannot binarize an empty exposure vector")
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NonFiniteValue(f"non-finite exposure at row {bad}")
    threshold = float(np.mean(values))
    labels = np.where(values > threshold, HIGH, LOW).astype(np.int64)
    return labels, threshold


def make_labeled(
    dataset: CountyDataset,
    hazard_id: str,
    missing_policy: str = "drop",
) -> LabeledDataset:
    """Binarize one hazard of a county into a LabeledDataset.

    ``missing_policy`` controls rows whose exposure for this hazard is NaN:
    "drop" removes them for this hazard only, "error" raises NonFiniteValue.
    Raises HazardAbsent when the county has no data for the hazard, and
    DegenerateLabels when binarization leaves a single class.
    """
    if hazard_id not in dataset.hazards:
        raise HazardAbsent(
            f"hazard {hazard_id!r} absent in county {dataset.county_id!r}"
        )
    exposure = dataset.hazards[hazard_id]
    keep = np.isfinite(exposure)
    if not np.all(keep):
        if missing_policy == "error":
            bad = int(np.flatnonzero(~keep)[0])
            raise NonFiniteValue(
                f"missing {hazard_id!r} exposure at tract "
                f"{dataset.tract_ids[bad]!r} in county {dataset.county_id!r}"
            )
        if missing_policy != "drop":
            raise ValueError(f"unknown missing policy {missing_policy!r}")
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise HazardAbsent(
            f"hazard {hazard_id!r} has no recorded values in county "
            f"{dataset.county_id!r}"
        )
    labels, threshold = binarize(exposure[idx])
    n_high = int(np.sum(labels == HIGH))
    if n_high == 0 or n_high == labels.size:
        raise DegenerateLabels(
            f"county {dataset.county_id!r} hazard {hazard_id!r}: all labels "
            f"{'high' if n_high else 'low'} (threshold {threshold})"
        )
    return LabeledDataset(
        county_id=dataset.county_id,
        hazard_id=hazard_id,
        schema=dataset.schema,
        tract_ids=tuple(dataset.tract_ids[i] for i in idx),
        features=dataset.features[idx],
        labels=labels,
        threshold=threshold,
    )


def _parse_cell(raw: str, row: int, column: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise NonNumericCell(
            f"cell {raw!r} at row {row}, column {column!r} is not numeric",
            row=row,
            column=column,
        ) from None
    if math.isnan(value) or math.isinf(value):
        raise NonNumericCell(
            f"cell {raw!r} at row {row}, column {column!r} is not finite",
            row=row,
            column=column,
        )
    return value


def load_county_csv(
    path,
    schema: FeatureSchema | None = None,
    county_id: str | None = None,
    missing_feature_policy: str = "error",
) -> CountyDataset:
    """Read one county CSV into a CountyDataset.

    Columns prefixed ``hazard__`` are exposures, ``tract_id`` is the key,
    everything else is a feature. With an explicit schema, exactly those
    feature columns are read (in schema order); extra feature columns are
    ignored. Empty hazard cells mean "no exposure recorded". Empty feature
    cells are an error under the default strict policy; the opt-in
    "impute_median" policy fills them with the column median instead.
    """
    path = str(path)
    if county_id is None:
        county_id = path.rsplit("/", 1)[-1]
        county_id = county_id[:-4] if county_id.endswith(".csv") else county_id
    if missing_feature_policy not in ("error", "impute_median"):
        raise ValueError(f"unknown missing feature policy {missing_feature_policy!r}")

    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{path}: file is empty, no header row") from None
        rows = list(reader)

    if TRACT_COLUMN not in header:
        raise MissingColumn(f"{path}: mandatory column {TRACT_COLUMN!r} missing")
    tract_pos = header.index(TRACT_COLUMN)
    hazard_cols = [
        (name[len(HAZARD_PREFIX):], i)
        for i, name in enumerate(header)
        if name.startswith(HAZARD_PREFIX)
    ]
    file_features = [
        (name, i)
        for i, name in enumerate(header)
        if i != tract_pos and not name.startswith(HAZARD_PREFIX)
    ]

    if schema is None:
        feature_cols = file_features
        schema = FeatureSchema(tuple(name for name, _ in feature_cols))
    else:
        positions = {name: i for name, i in file_features}
        feature_cols = []
        for name in schema.feature_names:
            if name not in positions:
                raise MissingColumn(
                    f"{path}: feature column {name!r} required by schema is missing"
                )
            feature_cols.append((name, positions[name]))

    n = len(rows)
    tract_ids: list[str] = []
    features = np.empty((n, len(feature_cols)), dtype=np.float64)
    hazards = {hid: np.empty(n, dtype=np.float64) for hid, _ in hazard_cols}

    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise MissingColumn(
                f"{path}: row {r} has {len(row)} cells, header has {len(header)}"
            )
        tract_ids.append(row[tract_pos])
        for j, (name, pos) in enumerate(feature_cols):
            raw = row[pos].strip()
            if raw == "":
                if missing_feature_policy == "error":
                    raise NonNumericCell(
                        f"empty feature cell at row {r}, column {name!r} "
                        "(strict missing-value policy)",
                        row=r,
                        column=name,
                    )
                features[r, j] = np.nan
            else:
                features[r, j] = _parse_cell(raw, r, name)
        for hid, pos in hazard_cols:
            raw = row[pos].strip()
            hazards[hid][r] = np.nan if raw == "" else _parse_cell(raw, r, header[pos])

    if len(set(tract_ids)) != len(tract_ids):
        seen = set()
        dup = next(t for t in tract_ids if t in seen or seen.add(t))
        raise DuplicateTract(f"{path}: tract_id {dup!r} appears more than once")

    if missing_feature_policy == "impute_median":
        for j in range(features.shape[1]):
            col = features[:, j]
            mask = np.isnan(col)
            if mask.any():
                finite = col[~mask]
                if finite.size == 0:
                    raise NonNumericCell(
                        f"feature column {feature_cols[j][0]!r} has no values to "
                        "impute from",
                        column=feature_cols[j][0],
                    )
                col[mask] = float(np.median(finite))

    return CountyDataset(
        county_id=county_id,
        schema=schema,
        tract_ids=tuple(tract_ids),
        features=features,
        hazards=hazards,
    )


def write_county_csv(dataset: CountyDataset, path) -> None:
    """Write a CountyDataset back to the standard CSV layout.

    Floats use repr formatting, so load -> write -> load round-trips
    byte-identically. NaN hazard entries become empty cells.
    """
    header = [TRACT_COLUMN, *dataset.schema.feature_names]
    hazard_ids = dataset.hazard_ids()
    header += [HAZARD_PREFIX + hid for hid in hazard_ids]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for r in range(dataset.n):
            row = [dataset.tract_ids[r]]
            row += [repr(float(v)) for v in dataset.features[r]]
            for hid in hazard_ids:
                value = dataset.hazards[hid][r]
                row.append("" if math.isnan(value) else repr(float(value)))
            writer.writerow(row)


def align_schemas(datasets: list[CountyDataset]) -> FeatureSchema:
    """Reconcile county schemas to one canonical ordered feature list.

    The first dataset's order is canonical. Counties listing the same
    feature names in a different order are permuted in place to match;
    any difference in the name sets raises SchemaMismatch naming the
    offending county and column.
    """
    if not datasets:
        raise SchemaMismatch("no datasets to align")
    canonical = datasets[0].schema
    canon_names = canonical.feature_names
    canon_set = set(canon_names)
    for dataset in datasets[1:]:
        names = dataset.schema.feature_names
        if names == canon_names:
            continue
        name_set = set(names)
        missing = canon_set - name_set
        if missing:
            raise SchemaMismatch(
                f"county {dataset.county_id!r} lacks feature "
                f"{sorted(missing)[0]!r}",
                county=dataset.county_id,
                column=sorted(missing)[0],
            )
        extra = name_set - canon_set
        if extra:
            raise SchemaMismatch(
                f"county {dataset.county_id!r} has unknown feature "
                f"{sorted(extra)[0]!r}",
                county=dataset.county_id,
                column=sorted(extra)[0],
            )
        order = [names.index(name) for name in canon_names]
        dataset.features = dataset.features[:, order]
        dataset.schema = canonical
    return canonical
