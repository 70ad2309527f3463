# -*- coding: utf-8 -*-
"""
Search spaces shipped with the toolkit, keyed by the learner they tune.

The boosted-tree spaces cover the knobs the reference experiments tuned
(eta, gamma, depth, L1/L2 rates, leaf count, column and row sampling,
child size). ``NN_SPACE`` is the dense-network random-search space.
"""

from core.hpo.space import Choice, LogUniform, QUniform, SearchSpace, Uniform

GBT_X_SPACE = SearchSpace(
    {
        "learning_rate": LogUniform(0.01, 0.5),
        "gamma": Uniform(0.0, 2.0),
        "max_depth": QUniform(2, 10, 1),
        "reg_lambda": LogUniform(1e-3, 10.0),
        "reg_alpha": LogUniform(1e-4, 1.0),
        "num_leaves": QUniform(4, 64, 1),
        "colsample_bytree": Uniform(0.5, 1.0),
        "n_estimators": QUniform(20, 200, 10),
    }
)

GBT_L_SPACE = SearchSpace(
    {
        "learning_rate": LogUniform(0.01, 0.5),
        "reg_alpha": LogUniform(1e-4, 1.0),
        "reg_lambda": LogUniform(1e-3, 10.0),
        "n_estimators": QUniform(20, 200, 10),
        "subsample": Uniform(0.5, 1.0),
        "subsample_freq": QUniform(1, 5, 1),
        "min_child_samples": QUniform(1, 20, 1),
        "num_leaves": QUniform(4, 64, 1),
    }
)

NN_SPACE = SearchSpace(
    {
        "units": QUniform(8, 128, 8),
        "n_layers": QUniform(1, 4, 1),
        "batch_size": Choice((16, 32, 64)),
        "lr": LogUniform(1e-4, 1e-1),
        "dropout": Uniform(0.0, 0.5),
        "activation": Choice(("relu", "elu", "sigmoid")),
    }
)

SPACES = {"gbt_x": GBT_X_SPACE, "gbt_l": GBT_L_SPACE, "mlp": NN_SPACE}
