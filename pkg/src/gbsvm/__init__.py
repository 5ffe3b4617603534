"""Granular-ball support vector machine solved by particle swarm optimization."""

__version__ = "0.1.0"

from .dataset import (
    Dataset,
    NoiseSpec,
    inject_label_noise,
    load_csv,
    make_gaussian_blobs,
    normalize_minmax,
    split_train_test,
)
from .granular_ball import (
    BallGenConfig,
    GranularBall,
    RadiusMode,
    generate_granular_balls,
    points_as_balls,
    split_ball,
)
from .model import (
    DualSolution,
    GbsvmModel,
    constraint_residual,
    dual_objective,
    lagrangian_dual,
    margin,
    predict,
    primal_feasibility_report,
    recover_b,
    recover_w,
)
from .pso import PsoConfig, project_feasible, solve
from .experiment import (
    ExperimentConfig,
    evaluate_accuracy,
    run_noise_sweep,
    run_timing_comparison,
    train_gbsvm,
    train_point_svm,
)
