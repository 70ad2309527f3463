from .space import (
    Choice,
    LogUniform,
    Params,
    QUniform,
    SearchSpace,
    Uniform,
    dimension_from_dict,
    grid_size,
    suggest_grid,
    suggest_random,
)
from .history import Trial, TrialHistory, TrialStatus, running_best, top_k
from .tpe import ParzenMixture, TpeConfig, split_good_bad, suggest_tpe
from .search import SearchAlgo, cv_objective, optimize
from .presets import GBT_L_SPACE, GBT_X_SPACE, NN_SPACE, SPACES
