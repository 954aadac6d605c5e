"""Prepare a service workdir for the co-pilot integration test.

Writes synthetic context tables, a study config pointing at them, and a
hand-built three-stump model (p = sigmoid(-1 + 0.5 per strategy flag)), so
the service starts instantly with fully predictable scores.
"""

import json
import sys
from pathlib import Path

import numpy as np

from fundlift.context import feature_schema
from fundlift.gbdt import GbdtClassifier
from fundlift.gbdt.tree import Tree
from fundlift.synth import write_minicorpus
from fundlift.textfeat import load_text_resources

STRATEGY_COLUMNS = (
    "gpt_gratitude_expressed", "gpt_urgency_explained", "gpt_match_grant_mentioned",
)


def build_stump_model(names):
    model = GbdtClassifier(num_rounds=3)
    model.feature_names_ = tuple(names)
    model.n_features_ = len(names)
    model.base_score_ = -1.0
    model.bin_edges_ = [np.asarray([0.0, 1.0]) for _ in names]
    model.best_iteration_ = 2
    model.trees_ = []
    gains = np.zeros(len(names))
    for flag in STRATEGY_COLUMNS:
        j = model.feature_names_.index(flag)
        gains[j] = 1.0
        model.trees_.append(Tree(
            feature=np.asarray([j, -1, -1], dtype=np.int32),
            split_bin=np.asarray([0, -1, -1], dtype=np.int32),
            threshold=np.asarray([0.0, 0.0, 0.0]),
            missing_left=np.asarray([True, True, True]),
            left=np.asarray([1, -1, -1], dtype=np.int32),
            right=np.asarray([2, -1, -1], dtype=np.int32),
            value=np.asarray([0.0, 0.0, 0.5]),
            is_leaf=np.asarray([False, True, True]),
        ))
    model.feature_gains_ = gains
    return model


def main() -> None:
    workdir = Path(sys.argv[1])
    workdir.mkdir(parents=True, exist_ok=True)
    paths = write_minicorpus(workdir / "data", n=20)
    names, _ = feature_schema(load_text_resources())
    out = workdir / "out"
    out.mkdir(exist_ok=True)
    build_stump_model(names).save(out / "model.json")
    config = {
        "corpus": str(paths["corpus"]),
        "acs": str(paths["acs"]),
        "covid": str(paths["covid"]),
        "output_dir": str(out),
        "split": {"window_start": "2020-01-22", "train_end": "2020-03-31",
                  "val_end": "2020-04-30", "window_end": "2020-12-31"},
        "seed": 1,
        "llm": {"provider": "mock"},
    }
    (workdir / "config.json").write_text(json.dumps(config, indent=2))
    print(workdir / "config.json")


if __name__ == "__main__":
    main()
