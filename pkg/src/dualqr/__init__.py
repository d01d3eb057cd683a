"""QR decompositions of dual matrices and their applications.

A dual matrix ``A = A_s + A_i eps`` (``eps**2 = 0``) is stored as a pair of
real arrays.  The package provides full, thin, column-pivoted and randomized
QR factorizations of such matrices, the dual Moore-Penrose inverse built on
them, first-order perturbation tooling for the Q factor, and a
standing/traveling wave identifier for spatiotemporal data.
"""

from .dmpgi import PenroseReport, dmpgi, penrose_residuals
from .dmx import read_dmx, write_dmx
from .dual_core import DualMatrix, DualScalar, dinverse, dmul, dtranspose, structure_residuals
from .dual_qr import (
    DualQRFactors,
    SkewGenerator,
    build_skew_p,
    dqr,
    dqrcp,
    existence_residual,
    factor_residuals,
    rdqrcp,
    tdqr,
    tdqrcp,
)
from .errors import (
    DegenerateDiagonal,
    DualQRError,
    ExistenceConditionViolated,
    ParseError,
    RankDeficient,
    SingularStandardPart,
)
from .real_backend import QRFactorsReal, SketchConfig, SylvesterSolution, qr_real, rqrcp, sylvester_general

__all__ = [
    "DegenerateDiagonal",
    "DualMatrix",
    "DualQRError",
    "DualQRFactors",
    "DualScalar",
    "ExistenceConditionViolated",
    "ParseError",
    "PenroseReport",
    "QRFactorsReal",
    "RankDeficient",
    "SingularStandardPart",
    "SketchConfig",
    "SkewGenerator",
    "SylvesterSolution",
    "build_skew_p",
    "dinverse",
    "dmpgi",
    "dmul",
    "dqr",
    "dqrcp",
    "dtranspose",
    "existence_residual",
    "factor_residuals",
    "penrose_residuals",
    "qr_real",
    "rdqrcp",
    "read_dmx",
    "rqrcp",
    "structure_residuals",
    "sylvester_general",
    "tdqr",
    "tdqrcp",
    "write_dmx",
]

__version__ = "0.1.0"
