import numpy as np
import pytest

from hybridloc import Anchor, AnchorLayout, PathLossParams


@pytest.fixture
def layout():
    """Nine hybrid anchors on a 12 m x 6 m two-row grid, reference A3."""
    anchors = [
        Anchor("A1", (0.0, 0.0), ble=True, uwb=True),
        Anchor("A2", (3.0, 0.0), ble=True, uwb=True),
        Anchor("A3", (6.0, 0.0), ble=True, uwb=True),
        Anchor("A4", (9.0, 0.0), ble=True, uwb=True),
        Anchor("A5", (12.0, 0.0), ble=True, uwb=True),
        Anchor("A6", (1.5, 6.0), ble=True, uwb=True),
        Anchor("A7", (4.5, 6.0), ble=True, uwb=True),
        Anchor("A8", (7.5, 6.0), ble=True, uwb=True),
        Anchor("A9", (10.5, 6.0), ble=True, uwb=True),
    ]
    return AnchorLayout(anchors=tuple(anchors), reference_id="A3")


@pytest.fixture
def params():
    return PathLossParams(p0=-45.0, gamma=2.7)


def random_spd(rng, n=4, scale=1.0):
    """Random symmetric positive definite matrix B^T B + I scaled."""
    b = rng.normal(size=(n, n))
    return scale * (b.T @ b + np.eye(n))
