from .spec import ARCHS, InitScheme, ModelSpec
from .init import check_params, init_params, param_shapes
from .forward import cell_step, gate_values, readout, step_forward, velocity
from .jacobian import f_jacobian, jacobian
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    "ARCHS", "InitScheme", "ModelSpec",
    "check_params", "init_params", "param_shapes",
    "cell_step", "gate_values", "readout", "step_forward", "velocity",
    "f_jacobian", "jacobian",
    "Checkpoint", "load_checkpoint", "save_checkpoint",
]
