from .layers import (
    ACTIVATIONS,
    BatchNormSpec,
    Conv2dSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    GlobalAvgPoolSpec,
    MaxPoolSpec,
    layer_from_dict,
    layer_to_dict,
)
from .model import NetworkModel, NetworkSpec, OptimizerSpec, bce_from_logits, build_layers, nn_gradient_check, nn_train
from .presets import CNN_ROWS, cnn_experiment, default_spec_for, fit_cnn, fit_mlp, mlp, thermogram_cnn
