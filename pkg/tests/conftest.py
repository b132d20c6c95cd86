"""Shared fixtures for the lyacert test suite."""

from typing import Any, Callable

import numpy as np
import pytest

from lyacert.nn.dense import DenseNet
from tests.helpers import numeric_gradient, relative_error


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def grad_check() -> Callable[..., float]:
    """Relative error between analytic DenseGrads and finite differences of loss()."""

    def check(loss: Callable[[], float], net: DenseNet, analytic: Any) -> float:
        return relative_error(analytic.flat(), numeric_gradient(loss, net))

    return check


@pytest.fixture
def tmp_out(tmp_path, monkeypatch):
    """Point LYACERT_OUT at a temporary directory."""
    out = tmp_path / "runs"
    monkeypatch.setenv("LYACERT_OUT", str(out))
    return out
