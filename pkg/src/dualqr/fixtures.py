"""Small published matrices used as regression fixtures."""

import numpy as np

from .dual_core import DualMatrix

# 3x2 and 2x3 dual matrices with known generalized inverses.
A1 = DualMatrix([[1, 3], [9, 22], [4, 4]], [[4, 0], [2, 4], [4, 1]])
A2 = DualMatrix([[1, 3, 4], [9, 22, 4]], [[4, 0, 1], [2, 4, 4]])

# Upper-triangular 8x5 test matrix and its perturbation direction (scaled by tau).
PERTURB_A_S = np.array(
    [
        [1, -2, 1, 2, 3],
        [0, 2, 4, 1, -5],
        [0, 0, 3, -1, 2],
        [0, 0, 0, 4, 1],
        [0, 0, 0, 0, 5],
        [0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0],
    ],
    dtype=float,
)
PERTURB_A_I = np.array(
    [
        [0.2, -0.5, 0.3, 0.1, 0.4],
        [-0.1, 0.4, 0.1, -0.3, 0.2],
        [0.5, 0.7, -0.2, 0.1, 0.6],
        [0.3, -0.6, 0.1, -0.1, 0.2],
        [0.2, 0.1, 0.7, 0.3, -0.4],
        [0.4, 0.8, -0.2, 0.1, 0.3],
        [0.6, -0.1, -0.5, 0.1, -0.2],
        [0.1, -0.3, 0.2, 0.6, 0.7],
    ]
)
for _a in (PERTURB_A_S, PERTURB_A_I):
    _a.setflags(write=False)
del _a
