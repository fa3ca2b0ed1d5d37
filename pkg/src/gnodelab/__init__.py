"""Gated neural ODE laboratory.

Train gated/ungated continuous-time recurrent models on synthetic tasks,
analyze their fixed-point structure, and probe mean-field initializations
and storage capacity. Submodules: models, training, tasks, analysis, mft,
capacity, data, config, cli, plus the numerical primitives they share.
"""

__version__ = "0.1.0"
