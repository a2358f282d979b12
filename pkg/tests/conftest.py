import csv
import io
from pathlib import Path

import numpy as np
import pytest

from taxbench import dataset

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def iris_path() -> Path:
    return DATA_DIR / "iris.csv"


@pytest.fixture(scope="session")
def iris_table(iris_path):
    return dataset.load_table(str(iris_path))


def synth_csv(n_rows: int = 500, seed: int = 99, missing_rate: float = 0.0) -> bytes:
    """Mixed-kind synthetic table: two numeric columns, one categorical, one
    date column, one identifier."""
    rng = np.random.default_rng(seed)
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["rid", "num_a", "num_b", "cat_c", "date_d"])
    cats = ["red", "green", "blue", "cyan"]
    for i in range(n_rows):
        def cell(value):
            return "" if missing_rate and rng.random() < missing_rate else value

        writer.writerow(
            [
                f"row-{i:04d}",
                cell(round(float(rng.normal(10, 4)), 2)),
                cell(round(float(rng.uniform(-5, 5)), 2)),
                cell(cats[rng.integers(0, len(cats))]),
                cell(f"2020-{rng.integers(1, 13):02d}-{rng.integers(1, 29):02d}"),
            ]
        )
    return out.getvalue().encode()


@pytest.fixture(scope="session")
def synth_table_500():
    return dataset.load_table(synth_csv(500), "csv")
