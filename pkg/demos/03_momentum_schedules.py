"""Effect of the momentum schedule on a kernel ridge problem.

The heuristic schedule starts without momentum and lets it grow to 0.5; the
theoretical schedules come from the iterate-averaging view, with ``eta``
constant or switched from 0.995 to 1 once the momentum reaches 0.5.
"""

import numpy as np

from sketchsolve import MomentumSchedule, SketchConfig, SolverConfig, build_kernel, solve_momentum

rng = np.random.default_rng(0)
X = rng.standard_normal((400, 10))
y = np.sin(X[:, 0]) + 0.1 * rng.standard_normal(400)
problem = build_kernel(X, y, lam=1.0 / 400, sigma=2.0)
config = SolverConfig(tol=1e-4, max_iter=20000, sketch=SketchConfig("subsample", 54), seed=3)

schedules = {
    "none": MomentumSchedule("none"),
    "constant 0.5": MomentumSchedule("constant"),
    "theoretical eta=0.5": MomentumSchedule("theoretical", eta=0.5),
    "theoretical increasing": MomentumSchedule("theoretical_increasing"),
    "heuristic": MomentumSchedule("heuristic"),
}
for label, schedule in schedules.items():
    report = solve_momentum(problem, config, schedule)
    print(f"{label:>24}: {report.iterations:>6} iterations, final residual {report.residual_trace[-1]:.1e}")
