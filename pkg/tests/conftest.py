import numpy as np
import pytest

from ratchoice.conflict_data import FEATURES, SynthConfig, normalize, outcomes, synth_generate
from ratchoice.expectations import ExpectationModel, LabeledDataset, TrainConfig, init_model, train
from ratchoice.utility import Alternative

ROUTES = [("JHB-NY", 18.0), ("JHB-DB-NY", 36.0), ("JHB-LN-NY", 24.0), ("JHB-PR-NY", 26.0)]


@pytest.fixture
def routes():
    return [Alternative(i, i.replace("-", " to "), c) for i, c in ROUTES]


@pytest.fixture
def routes_csv(tmp_path):
    path = tmp_path / "routes.csv"
    path.write_text("id,label,cost\n" + "".join(f"{i},{i},{c:g}\n" for i, c in ROUTES), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def synth_dyads():
    return synth_generate(SynthConfig(n=1000, seed=1))


@pytest.fixture(scope="session")
def trained(synth_dyads):
    """Network trained on the default synthetic set: (model, norm, train, holdout)."""
    X, norm = normalize(synth_dyads)
    data = LabeledDataset(X, outcomes(synth_dyads), FEATURES)
    tr, ho = data.split(0.8, 1)
    model, _ = train(init_model([7, 10, 1], 1), tr, TrainConfig(0.5, 2000, 1))
    return model, norm, tr, ho


def linear_model(weights, bias):
    """Single-layer logistic model: risk = logistic(w . z + b) on normalized z."""
    w = np.append(np.asarray(weights, dtype=float), bias)[None, :]
    return ExpectationModel((len(weights), 1), (w,))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
