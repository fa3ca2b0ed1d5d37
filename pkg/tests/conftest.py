import numpy as np
import pytest

from gnodelab.models import InitScheme, ModelSpec, init_params
from gnodelab.rng import stream


@pytest.fixture
def rng():
    return stream(1234, "tests")


def tiny_spec(arch: str, **overrides) -> ModelSpec:
    """A small model of the given architecture with sensible test defaults."""
    kw = dict(arch=arch, n=3, d=2, out_dim=2)
    if arch in ("node", "gnode"):
        kw.update(l_h=2, hidden=4)
    kw.update(overrides)
    return ModelSpec(**kw)


def tiny_params(spec: ModelSpec, seed: int = 0):
    return init_params(spec, InitScheme(), stream(seed, "tests-init"))
