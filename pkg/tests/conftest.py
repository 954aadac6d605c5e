import json
from pathlib import Path

import numpy as np
import pytest

from fundlift import pipeline as pl
from fundlift.gbdt import GbdtClassifier
from fundlift.gbdt.tree import Tree
from fundlift.llm.client import LlmClient, LlmClientConfig
from fundlift.synth import write_minicorpus
from fundlift.textfeat import load_text_resources

DATA_DIR = Path(__file__).parent / "data"


def make_flag_stump_model(feature_names, flag_names, base_score=-1.0, step=0.5):
    """Hand-built booster: p = sigmoid(base + step * each named 0/1 flag).

    One stump per flag: split at value 0, left leaf 0, right leaf ``step``.
    """
    feature_names = tuple(feature_names)
    model = GbdtClassifier(num_rounds=len(flag_names))
    model.feature_names_ = feature_names
    model.n_features_ = len(feature_names)
    model.base_score_ = base_score
    model.bin_edges_ = [np.asarray([0.0, 1.0]) for _ in feature_names]
    model.best_iteration_ = len(flag_names) - 1
    model.trees_ = []
    gains = np.zeros(len(feature_names))
    for flag in flag_names:
        j = feature_names.index(flag)
        gains[j] = 1.0
        model.trees_.append(Tree(
            feature=np.asarray([j, -1, -1], dtype=np.int32),
            split_bin=np.asarray([0, -1, -1], dtype=np.int32),
            threshold=np.asarray([0.0, 0.0, 0.0]),
            missing_left=np.asarray([True, True, True]),
            left=np.asarray([1, -1, -1], dtype=np.int32),
            right=np.asarray([2, -1, -1], dtype=np.int32),
            value=np.asarray([0.0, 0.0, step]),
            is_leaf=np.asarray([False, True, True]),
        ))
    model.feature_gains_ = gains
    return model


@pytest.fixture(scope="session")
def text_resources():
    return load_text_resources()


@pytest.fixture()
def mock_client(tmp_path):
    return LlmClient(LlmClientConfig(provider="mock", cache_dir=str(tmp_path / "cache")))


@pytest.fixture(scope="session")
def mock_client_nocache():
    return LlmClient(LlmClientConfig(provider="mock"))


@pytest.fixture(scope="session")
def minicorpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("minicorpus")
    write_minicorpus(d)
    return d


@pytest.fixture(scope="session")
def study_config(minicorpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("study_out")
    config = {
        "corpus": str(minicorpus_dir / "corpus.jsonl"),
        "acs": str(minicorpus_dir / "acs.csv"),
        "covid": str(minicorpus_dir / "covid.csv"),
        "output_dir": str(out),
        "split": {
            "window_start": "2020-01-22", "train_end": "2020-03-31",
            "val_end": "2020-04-30", "window_end": "2020-12-31",
        },
        "grid": [
            {"num_rounds": 120, "learning_rate": 0.1, "max_leaves": 15,
             "min_samples_leaf": 10},
            {"num_rounds": 120, "learning_rate": 0.1, "max_leaves": 15,
             "min_samples_leaf": 10, "feature_fraction": 0.4},
        ],
        "seed": 42,
        "llm": {"provider": "mock"},
        "simulation_n": 60,
    }
    path = minicorpus_dir / "config.json"
    path.write_text(json.dumps(config, indent=2))
    return pl.load_study_config(path)


@pytest.fixture(scope="session")
def trained_study(study_config):
    return pl.run_training_study(study_config)


# -- acceptance-criterion reporting ------------------------------------------

_CRITERION_RESULTS: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion covered by this test"
    )


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    marker_name = getattr(report, "_criterion", None)
    if marker_name:
        outcome = "PASS" if report.outcome == "passed" else report.outcome.upper()
        _CRITERION_RESULTS[marker_name] = outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker:
        report._criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _CRITERION_RESULTS.items():
        terminalreporter.write_line(f"[{outcome}] {name}")
