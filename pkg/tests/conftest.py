"""Shared fixtures: tiny generators kept small enough for a fast suite."""

from __future__ import annotations

import numpy as np
import pytest

from latentscope.engine import (
    Activation,
    ActivationKind,
    FullyConnected,
    GeneratorModel,
    Reshape,
    TransposedConv,
    dcgan64_architecture,
    validate_shape_chain,
)
from latentscope.latent import LatentSpace
from latentscope.weights import save_model


@pytest.fixture(scope="session")
def tiny_model():
    """Narrow 64x64 generator (1/16 channel width), deterministic weights."""
    return dcgan64_architecture(seed=0, channel_scale=1 / 16)


@pytest.fixture(scope="session")
def tiny_model_path(tiny_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "tiny64.lgw1"
    save_model(tiny_model, path)
    return path


def build_micro_model(input_dim: int = 8, seed: int = 1) -> GeneratorModel:
    """Minimal generator with a non-default input dim: FC, one upsample, tanh."""
    rng = np.random.default_rng(seed)
    fc = FullyConnected(
        weights=rng.normal(0.0, 0.05, size=(2 * 4 * 4, input_dim)),
        bias=np.zeros(2 * 4 * 4),
    )
    up = TransposedConv(
        weights=rng.normal(0.0, 0.05, size=(2, 3, 4, 4)),
        bias=np.zeros(3),
        stride=2,
        padding=1,
    )
    model = GeneratorModel(
        input_dim=input_dim,
        input_space=LatentSpace.UNIFORM_CUBE,
        layers=(
            fc,
            Reshape(target_shape=(2, 4, 4)),
            up,
            Activation(kind=ActivationKind.TANH),
        ),
        output_shape=(3, 8, 8),
    )
    validate_shape_chain(model)
    return model


@pytest.fixture(scope="session")
def micro_model():
    return build_micro_model()


@pytest.fixture(scope="session")
def micro_model_path(micro_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "micro.lgw1"
    save_model(micro_model, path)
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Reprint the acceptance scoreboard where capture cannot swallow it."""
    try:
        import test_acceptance
    except ImportError:
        return
    results = getattr(test_acceptance, "RESULTS", [])
    if not results:
        return
    terminalreporter.section("acceptance")
    for ok, label, detail in results:
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
