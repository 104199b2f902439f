"""Sketch-and-project solvers for ridge and kernel ridge regression.

The package is organised bottom-up:

* :mod:`~sketchsolve.linalg`: containers, least-norm subsolver, Walsh-Hadamard transform
* :mod:`~sketchsolve.problem`: primal, dual and kernel ridge systems ``A w = b``
* :mod:`~sketchsolve.sketches`: subsample, Gaussian, Count, SubCount and SRHT sketches
* :mod:`~sketchsolve.schedules`: step-size and momentum schedules
* :mod:`~sketchsolve.solvers`: sketch-and-project, momentum, acceleration, CD, CG, direct
* :mod:`~sketchsolve.theory`: rates, bounds and acceleration parameters at small scale
* :mod:`~sketchsolve.bench`, :mod:`~sketchsolve.cli`: benchmark harness and command line
"""

from .errors import ContractViolation, DivergenceError, InputError, ParseError, SketchSolveError
from .problem import (
    RidgeProblem,
    auto_select,
    build_dual,
    build_kernel,
    build_primal,
    predict_kernel,
    recover_weights,
)
from .schedules import MomentumSchedule, schedule_step
from .sketches import CoordinateSketch, SketchConfig, draw
from .solvers import (
    AccelParams,
    SolveReport,
    SolverConfig,
    solve_accelerated,
    solve_cd_momentum,
    solve_cg,
    solve_direct,
    solve_momentum,
    solve_momentum_averaging_form,
    solve_sketch_project,
)
from .theory import (
    DiscreteSketchEnsemble,
    RateCertificate,
    accel_params_exact,
    cd_complexities,
    certify,
    momentum_bound,
    rate_rho,
    superiority_region,
)

__version__ = "0.1.0"

__all__ = [
    "AccelParams",
    "ContractViolation",
    "CoordinateSketch",
    "DiscreteSketchEnsemble",
    "DivergenceError",
    "InputError",
    "MomentumSchedule",
    "ParseError",
    "RateCertificate",
    "RidgeProblem",
    "SketchConfig",
    "SketchSolveError",
    "SolveReport",
    "SolverConfig",
    "accel_params_exact",
    "auto_select",
    "build_dual",
    "build_kernel",
    "build_primal",
    "cd_complexities",
    "certify",
    "draw",
    "momentum_bound",
    "predict_kernel",
    "rate_rho",
    "recover_weights",
    "schedule_step",
    "solve_accelerated",
    "solve_cd_momentum",
    "solve_cg",
    "solve_direct",
    "solve_momentum",
    "solve_momentum_averaging_form",
    "solve_sketch_project",
    "superiority_region",
]
