"""Ridge regression through the primal and the dual system.

With more features than samples the dual system ``(X X^T + lam I) alpha = y``
is the smaller one; ``auto_select`` picks it and ``recover_weights`` maps the
solution back to ``w = X^T alpha``. Both routes give the same weights.
"""

import numpy as np

from sketchsolve import SketchConfig, SolverConfig, build_primal, solve_direct, solve_sketch_project
from sketchsolve.problem import auto_select, recover_weights

rng = np.random.default_rng(0)
n, d, lam = 80, 300, 1e-1
X = rng.standard_normal((n, d)) / np.sqrt(d)
y = X @ rng.standard_normal(d) + 0.01 * rng.standard_normal(n)

problem = auto_select(X, y, lam)
print(f"auto_select chose the {problem.route} route, system size {problem.m}")

config = SolverConfig(tol=1e-8, max_iter=20000, sketch=SketchConfig("subsample", 20), seed=1)
report = solve_sketch_project(problem, config)
w_dual = recover_weights(problem, report.solution)
print(f"sketch-and-project: {report.iterations} iterations, converged={report.converged}")

w_primal = solve_direct(build_primal(X, y, lam))
print(f"relative gap to the primal direct solution: "
      f"{np.linalg.norm(w_dual - w_primal) / np.linalg.norm(w_primal):.2e}")
