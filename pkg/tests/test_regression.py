"""Coupling-strength sweep pinned against the first validated run of this package."""

import csv
from pathlib import Path

import numpy as np
import pytest

from cavswap.protocols import sweep_fig2

REFERENCE = Path(__file__).parent / "data" / "fig2_reference.csv"


@pytest.fixture(scope="module")
def reference():
    with open(REFERENCE, newline="") as fh:
        reader = csv.reader(fh)
        assert next(reader) == ["lambda_over_kappa", "F_min", "P"]
        return np.array([[float(x) for x in row] for row in reader])


def test_sweep_matches_pinned_values(reference):
    rows = sweep_fig2(reference[:, 0], gamma=0.5, kappa_in=0.1)
    got = np.array([[r.lambda_over_kappa, r.F_min, r.P] for r in rows])
    np.testing.assert_array_equal(got[:, 0], reference[:, 0])
    np.testing.assert_allclose(got[:, 1:], reference[:, 1:], rtol=0, atol=1e-12)


def test_pinned_curves_rise(reference):
    assert np.all(np.diff(reference[:, 1]) > 0)
    assert np.all(np.diff(reference[:, 2]) > 0)
