from geodl.nn.losses import (
    DistillConfig,
    FeaturePair,
    LossGradient,
    geodl_loss,
    geodl_loss_grad,
    cosine_distill_loss,
    cosine_distill_loss_grad,
    lwf_loss,
    lwf_loss_grad,
    adaptive_beta
)
from geodl.nn.model import (
    ModelState,
    init_model,
    encode,
    class_probabilities
)
from geodl.nn.train_net import (
    DivergenceError,
    HyperParams,
    train_base,
    incremental_step,
    distillation_terms,
    sgd_step,
    update_memory
)
