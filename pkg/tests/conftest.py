import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ccgi import build_ensemble, make_double_slit

# image-plane pitches and object-plane slit geometry used throughout
PITCH_X = 164.16
PITCH_Y = 109.44
SLIT_WIDTH = 200.0
SLIT_SEPARATION = 800.0
BETA = 2.56


@pytest.fixture(scope="session")
def slit_phantom():
    """The default 32x64 double-slit phantom (N = 2048)."""
    return make_double_slit(rows=32, cols=64, pitch_x=PITCH_X, pitch_y=PITCH_Y,
                            slit_width_obj=SLIT_WIDTH, separation_obj=SLIT_SEPARATION,
                            beta=BETA)


@pytest.fixture(scope="session")
def small_ensemble():
    """A compact ensemble for solver tests: N=256, M=128."""
    return build_ensemble(256, 128, seed=7)


def blocks_16x16() -> np.ndarray:
    """Piecewise-constant 16x16 test image with two rectangles."""
    img = np.zeros((16, 16))
    img[4:9, 3:8] = 1.0
    img[10:14, 10:15] = 0.6
    return img
