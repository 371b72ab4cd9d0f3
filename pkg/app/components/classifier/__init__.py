from .mlp import (
    THRESHOLD,
    DenseLayer,
    MlpModel,
    accuracy,
    build_default,
    forward,
    mlp_loss_and_gradients,
    predict,
    train_mlp,
)
