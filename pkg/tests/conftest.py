import numpy as np
import pytest

from hazardlens.dataset import FeatureSchema, LabeledDataset


def labeled_from_arrays(
    X, y, county="testville", hazard="heat", threshold=0.0, feature_names=None
) -> LabeledDataset:
    """Wrap bare arrays in a LabeledDataset with synthetic tract ids."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if feature_names is None:
        feature_names = tuple(f"f{j:02d}" for j in range(X.shape[1]))
    return LabeledDataset(
        county_id=county,
        hazard_id=hazard,
        schema=FeatureSchema(tuple(feature_names)),
        tract_ids=tuple(f"{county}-t{i:04d}" for i in range(X.shape[0])),
        features=X,
        labels=y,
        threshold=threshold,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
