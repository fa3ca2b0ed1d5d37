from .adamw import OptimState, adamw_init, adamw_step
from .backprop import bptt_grad, resolve_h0, substeps_for, unroll
from .losses import LOSS_KINDS, loss_and_grad, mse_loss, xent_loss
from .loop import (SWEEP_BATCHES, SWEEP_DECAYS, SWEEP_ETAS, TrainConfig,
                   TrainLog, evaluate, fisher_yates, train, write_log_csv)

__all__ = [
    "OptimState", "adamw_init", "adamw_step",
    "bptt_grad", "resolve_h0", "substeps_for", "unroll",
    "LOSS_KINDS", "loss_and_grad", "mse_loss", "xent_loss",
    "SWEEP_BATCHES", "SWEEP_DECAYS", "SWEEP_ETAS",
    "TrainConfig", "TrainLog", "evaluate", "fisher_yates", "train",
    "write_log_csv",
]
