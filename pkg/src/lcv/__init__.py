"""Augmented Lagrangian solver for convex QPs that finds the least
constraint-violation shift when the constraints are infeasible."""
from ._kernels import BACKEND
from .alm import AlmConfig, SolveReport, check_optimality_certificate, solve
from .cones import Box, ConeSpec, NonPos, SecondOrder, Zero, project, support_function
from .errors import (DimensionMismatch, EmptyCone, LcvError, MaxIterExceeded, NonConvergence,
                     NotPsd, ParseError, ValidationError)
from .io import parse_problem, problem_from_dict, problem_to_dict
from .model import Certificate, CertificateKind, QpProblem, ShiftVector, validate
from .oracle import least_shift

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AlmConfig", "SolveReport", "solve", "check_optimality_certificate",
    "ConeSpec", "Zero", "NonPos", "Box", "SecondOrder", "project", "support_function",
    "LcvError", "ValidationError", "DimensionMismatch", "NotPsd", "EmptyCone", "ParseError",
    "NonConvergence", "MaxIterExceeded", "QpProblem", "ShiftVector", "Certificate",
    "CertificateKind", "validate", "parse_problem", "problem_from_dict", "problem_to_dict",
    "least_shift",
]
