# Importing the family modules registers their fitters.
from .base import (
    LearnerMetadata,
    LearnerRegistry,
    Model,
    RegisteredLearner,
    get_learner,
    learner,
    registry_instance,
)
from .boosting import GbtModel, GbtParams, fit_gbt_params, fit_gbt_x, fit_gbt_l, train_gbt
from .linear import (
    LinearModel,
    LinearSvmModel,
    LogisticModel,
    fit_linear,
    fit_linear_svm,
    fit_logistic,
    train_linear,
    train_linear_svm,
    train_logistic,
)
from .neighbors import KnnModel, fit_knn, train_knn
from .network import (
    NetworkModel,
    NetworkSpec,
    OptimizerSpec,
    cnn_experiment,
    mlp,
    nn_gradient_check,
    nn_train,
    thermogram_cnn,
)
from .serialization import load_model, save_model
from .tree import ForestModel, TreeModel, TreeStructure, best_gini_split, fit_forest, fit_tree, train_forest, train_tree
