from .config import TrainConfig
from .layer import (
    AutoencoderLayer,
    decode,
    decode_stack,
    encode,
    extract_features,
    init_layer,
    reconstruct,
    reconstruct_stack,
)
from .objective import (
    ClassMeans,
    LossBreakdown,
    batch_loss,
    class_means,
    dataset_loss,
    gradients,
    loss,
    per_sample_terms,
    sample_losses,
    squared_distances,
    two_class_loss,
)
from .trainer import (
    features_dataset,
    fine_tune,
    fine_tune_stack,
    sgd_step,
    stack_class_means,
    stack_train,
    train_layer,
)
