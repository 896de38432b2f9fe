from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wmonogamy import example_five_qubit_params

# Frozen values for the built-in five-qubit demo state, computed from the
# amplitudes a = b2 = 1/sqrt(10), b1 = 1/sqrt(15), b3 = sqrt(2/15),
# b4 = sqrt(3/5), b5 = 0.
PAIR_VALUES = (
    2.0 / np.sqrt(150.0),          # pair (1,2): 0.16329931618554522
    2.0 * np.sqrt(2.0) / 15.0,     # pair (1,3): 0.18856180831641267
    0.4,                           # pair (1,4)
    0.0,                           # pair (1,5)
)
UPPER_BOUND = 2.0 / np.sqrt(18.0)  # sqrt(2 (1 - 8/9)) = 0.47140452079103173
LB23_AT_2 = float(np.sqrt(PAIR_VALUES[0] ** 2 + PAIR_VALUES[1] ** 2))       # 0.2494438257849294
LB234_AT_2 = float(np.sqrt(sum(p * p for p in PAIR_VALUES[:3])))            # 0.4714045207910316
# marginal of qubit 1 has eigenvalues (1 +- sqrt(7/9)) / 2
EIG_A1_HI = (1.0 + np.sqrt(7.0 / 9.0)) / 2.0   # 0.9409585518440984
EIG_A1_LO = (1.0 - np.sqrt(7.0 / 9.0)) / 2.0   # 0.0590414481559016
S_A1 = float(-(EIG_A1_HI * np.log2(EIG_A1_HI) + EIG_A1_LO * np.log2(EIG_A1_LO)))
# = 0.3236280158441103


@pytest.fixture(scope="session")
def demo_params():
    return example_five_qubit_params()


@pytest.fixture(scope="session")
def warm_kernels():
    from wmonogamy import _kernels

    _kernels.warmup()
    return _kernels.BACKEND
