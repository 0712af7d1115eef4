from .config import (
    ABLATIONS,
    DEFAULT_PLAN,
    NetworkConfig,
    StageSpec,
    TrainConfig,
    ablation_config,
    build_stages,
)
from .io import load_model, parse_model, dump_model, save_model
from .network import (
    ForwardTape,
    ParamStore,
    backward_batch,
    backward_full,
    conv2d_backward,
    conv2d_forward,
    cross_entropy_loss,
    forward_batch,
    forward_full,
    init_params,
    mac_count,
    param_count,
    stack_samples,
    stage_forward,
    symmetric_mean,
)
from .optim import SGD, sgd_step
from .train import EpochLog, evaluate, predict_logits, train
