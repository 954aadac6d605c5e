"""End-to-end studies: training, ablation, counterfactual simulation, and the
online-experiment design/analysis, plus report emission with a hash manifest.

Every stochastic step draws from the single StudyConfig seed, and all LLM
work goes through the configured client, so a mock-provider run is
byte-identical across reruns.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from . import stats
from .context import (
    FeatureMatrix,
    FeatureResources,
    GROUP_CONFIG,
    GROUP_DEMOGRAPHICS,
    GROUP_PANDEMIC,
    GROUP_TEXTUAL,
    assemble_feature_matrix,
    load_acs,
    load_covid,
)
from .corpus import CampaignRecord, SplitSpec, filter_blank, load_campaigns, split_by_date
from .errors import ProviderError, SchemaError
from .gbdt import (
    GbdtClassifier,
    GbdtParams,
    baseline_bernoulli,
    baseline_uniform,
    default_grid,
    evaluate,
    evaluate_predictions,
    gain_importance,
    group_importance,
    tune,
)
from .llm.augment import PrefixViolationError, augment_three, extend_neutral
from .llm.client import LlmClient, LlmClientConfig
from .llm.features import extract_gpt_features
from .textfeat.features import extract_lexicon_features, load_text_resources
from .textfeat.tokenize import tokenize

SIMULATION_FLAGS = (
    "gpt_gratitude_expressed",
    "gpt_match_grant_mentioned",
    "gpt_urgency_explained",
)


@dataclass
class StudyConfig:
    corpus_path: Path
    acs_path: Path
    covid_path: Path
    output_dir: Path
    split: SplitSpec
    grid: list[GbdtParams]
    seed: int
    llm: LlmClientConfig
    text_resource_dir: Path | None = None
    simulation_n: int = 60
    simulation_mode: str = "three"
    experiment_min_words: int = 180

    def stamped_grid(self) -> list[GbdtParams]:
        """Grid with every candidate pinned to the study seed."""
        return [dataclasses.replace(p, seed=self.seed) for p in self.grid]


def load_study_config(path: str | Path, seed: int | None = None,
                      mock_llm: bool = False) -> StudyConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"cannot read config {path}: {e}") from e
    base = path.parent

    def _p(key: str) -> Path:
        if key not in doc:
            raise SchemaError(f"config missing {key!r}")
        p = Path(doc[key])
        return p if p.is_absolute() else base / p

    split_doc = doc.get("split", {})
    try:
        split = SplitSpec(
            window_start=date.fromisoformat(split_doc["window_start"]),
            train_end=date.fromisoformat(split_doc["train_end"]),
            val_end=date.fromisoformat(split_doc["val_end"]),
            window_end=date.fromisoformat(split_doc["window_end"]),
        )
    except KeyError as e:
        raise SchemaError(f"config split missing {e}") from e
    grid = [GbdtParams(**g) for g in doc.get("grid", [])] or default_grid()
    llm_doc = dict(doc.get("llm", {}))
    if mock_llm:
        llm_doc["provider"] = "mock"
    llm_doc.setdefault("provider", "mock")
    llm = LlmClientConfig(**llm_doc)
    return StudyConfig(
        corpus_path=_p("corpus"),
        acs_path=_p("acs"),
        covid_path=_p("covid"),
        output_dir=_p("output_dir"),
        split=split,
        grid=grid,
        seed=int(doc.get("seed", 0)) if seed is None else seed,
        llm=llm,
        text_resource_dir=(base / doc["text_resources"]) if "text_resources" in doc else None,
        simulation_n=int(doc.get("simulation_n", 60)),
        simulation_mode=str(doc.get("simulation_mode", "three")),
        experiment_min_words=int(doc.get("experiment_min_words", 180)),
    )


def _stage(name: str):
    class _StageContext:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is None or isinstance(exc, _StagedError):
                return False
            if isinstance(exc, ProviderError):
                raise ProviderError(f"[{name}] {exc}") from exc
            raise _StagedError(f"[{name}] {exc}") from exc

    return _StageContext()


class _StagedError(SchemaError):
    pass


def load_resources(cfg: StudyConfig) -> FeatureResources:
    return FeatureResources(
        text=load_text_resources(cfg.text_resource_dir),
        acs=load_acs(cfg.acs_path),
        covid=load_covid(cfg.covid_path),
    )


def ingest_corpus(cfg: StudyConfig) -> tuple[list[CampaignRecord], dict]:
    with _stage("ingest"):
        records = load_campaigns(cfg.corpus_path)
        kept, removed = filter_blank(records)
    report = {"loaded": len(records), "removed_blank": removed, "kept": len(kept)}
    return kept, report


def build_matrix(cfg: StudyConfig, records, resources, client) -> FeatureMatrix:
    with _stage("features"):
        return assemble_feature_matrix(records, resources, client)


@dataclass
class TrainedStudy:
    model: GbdtClassifier
    matrix: FeatureMatrix
    records: list[CampaignRecord]
    labels: np.ndarray
    split_ids: dict[str, list[str]]
    metrics_rows: list[dict]
    importance_rows: list[dict]
    group_rows: list[dict]
    leaderboard_rows: list[dict]
    best_params: GbdtParams


def _split_matrix(matrix: FeatureMatrix, records, spec: SplitSpec):
    if not records:
        raise SchemaError("empty corpus")
    train, val, test = split_by_date(records, spec)
    index = {cid: i for i, cid in enumerate(matrix.ids)}

    def part(rs):
        idx = [index[r.id] for r in rs]
        X = matrix.values[idx]
        y = np.asarray([1.0 if r.funded else 0.0 for r in rs])
        return X, y, [r.id for r in rs]

    return part(train), part(val), part(test)


def _metric_row(split: str, name: str, metrics) -> dict:
    return {"split": split, "model": name, **metrics.as_row()}


def importance_tables(model: GbdtClassifier, matrix: FeatureMatrix) -> tuple[list, list]:
    """Per-feature and per-group gain-share tables."""
    importances = gain_importance(model)
    groups = matrix.groups_by_name()
    group_shares = group_importance(importances, groups)
    importance_rows = [
        {"feature": f, "group": groups[f], "gain_share": importances[f]}
        for f in sorted(importances, key=lambda f: (-importances[f], f))
    ]
    group_rows = [
        {"group": g, "share": group_shares.get(g, 0.0)}
        for g in (GROUP_TEXTUAL, GROUP_DEMOGRAPHICS, GROUP_CONFIG, GROUP_PANDEMIC)
    ]
    return importance_rows, group_rows


def run_training_study(cfg: StudyConfig, records=None, resources=None,
                       client=None, matrix=None) -> TrainedStudy:
    """Assemble, split, tune, train, and evaluate against both baselines."""
    client = client or LlmClient(cfg.llm)
    if records is None:
        records, _ = ingest_corpus(cfg)
    resources = resources or load_resources(cfg)
    if matrix is None:
        matrix = build_matrix(cfg, records, resources, client)

    with _stage("split"):
        (Xtr, ytr, ids_tr), (Xv, yv, ids_v), (Xte, yte, ids_te) = \
            _split_matrix(matrix, records, cfg.split)

    with _stage("train"):
        best_params, leaderboard = tune(
            cfg.stamped_grid(), Xtr, ytr, Xv, yv, feature_names=matrix.names
        )
        model = GbdtClassifier(**best_params.as_dict()).fit(
            Xtr, ytr, eval_set=(Xv, yv), feature_names=matrix.names
        )

    with _stage("evaluate"):
        uniform = baseline_uniform(ytr)
        bernoulli = baseline_bernoulli(ytr, seed=cfg.seed)
        metrics_rows = []
        for split_name, X, y in (("validation", Xv, yv), ("testing", Xte, yte)):
            metrics_rows.append(_metric_row(split_name, "gbdt", evaluate(model, X, y)))
            metrics_rows.append(_metric_row(
                split_name, "uniform_baseline",
                evaluate_predictions(y, uniform.predict(X)),
            ))
            metrics_rows.append(_metric_row(
                split_name, "random_baseline",
                evaluate_predictions(y, bernoulli.predict(X)),
            ))
        importance_rows, group_rows = importance_tables(model, matrix)
        leaderboard_rows = [
            {"rank": i, "index": r.index, "val_f1": r.val_f1, "rounds_used": r.rounds_used,
             **{f"param_{k}": v for k, v in r.params.as_dict().items()}}
            for i, r in enumerate(leaderboard)
        ]

    labels = np.asarray([1.0 if r.funded else 0.0 for r in records])
    return TrainedStudy(
        model=model, matrix=matrix, records=records, labels=labels,
        split_ids={"train": ids_tr, "validation": ids_v, "test": ids_te},
        metrics_rows=metrics_rows, importance_rows=importance_rows,
        group_rows=group_rows, leaderboard_rows=leaderboard_rows,
        best_params=best_params,
    )


def city_funded_rates(records: list[CampaignRecord]) -> list[dict]:
    """Per-city campaign counts and funded shares (map-figure data as CSV)."""
    by_city: dict[tuple[str, str], list[bool]] = {}
    for r in records:
        by_city.setdefault((r.city, r.state), []).append(r.funded)
    rows = []
    for (city, state), flags in sorted(by_city.items()):
        rows.append({
            "city": city, "state": state, "n_campaigns": len(flags),
            "funded_rate": sum(flags) / len(flags),
        })
    return rows


def load_study_artifacts(cfg: StudyConfig) -> TrainedStudy | None:
    """Rehydrate a TrainedStudy from a previous ``train`` run's artifacts.

    Returns None when any of model.json / matrix.csv / corpus_clean.jsonl is
    missing from the output directory. Metric tables are not reloaded.
    """
    out = cfg.output_dir
    needed = [out / "model.json", out / "matrix.csv", out / "corpus_clean.jsonl"]
    if not all(p.exists() for p in needed):
        return None
    model = GbdtClassifier.load(out / "model.json")
    matrix = FeatureMatrix.load_csv(out / "matrix.csv")
    records = load_campaigns(out / "corpus_clean.jsonl")
    labels = np.asarray([1.0 if r.funded else 0.0 for r in records])
    return TrainedStudy(
        model=model, matrix=matrix, records=records, labels=labels,
        split_ids={}, metrics_rows=[], importance_rows=[], group_rows=[],
        leaderboard_rows=[], best_params=model.params,
    )


ABLATION_SETS = (
    ("non_textual", (GROUP_CONFIG, GROUP_PANDEMIC, GROUP_DEMOGRAPHICS), ()),
    ("non_textual_plus_lexicon", (GROUP_CONFIG, GROUP_PANDEMIC, GROUP_DEMOGRAPHICS), ("lexicon",)),
    ("non_textual_plus_gpt", (GROUP_CONFIG, GROUP_PANDEMIC, GROUP_DEMOGRAPHICS), ("gpt",)),
    ("all_features", (GROUP_CONFIG, GROUP_PANDEMIC, GROUP_DEMOGRAPHICS), ("lexicon", "gpt")),
)


def _ablation_columns(matrix: FeatureMatrix, groups, textual_parts) -> list[int]:
    cols = []
    for j, (name, group) in enumerate(zip(matrix.names, matrix.groups)):
        if group in groups:
            cols.append(j)
        elif group == GROUP_TEXTUAL:
            is_gpt = name.startswith("gpt_")
            if ("gpt" in textual_parts and is_gpt) or ("lexicon" in textual_parts and not is_gpt):
                cols.append(j)
    return cols


def run_ablation(cfg: StudyConfig, study: TrainedStudy) -> list[dict]:
    """Re-tune and re-train on the four feature subsets; report test metrics."""
    matrix, records = study.matrix, study.records
    (Xtr, ytr, _), (Xv, yv, _), (Xte, yte, _) = _split_matrix(matrix, records, cfg.split)
    rows = []
    for set_name, groups, textual_parts in ABLATION_SETS:
        cols = _ablation_columns(matrix, groups, textual_parts)
        names = tuple(matrix.names[j] for j in cols)
        with _stage(f"ablation:{set_name}"):
            best, _ = tune(cfg.stamped_grid(), Xtr[:, cols], ytr, Xv[:, cols], yv,
                           feature_names=names)
            model = GbdtClassifier(**best.as_dict()).fit(
                Xtr[:, cols], ytr, eval_set=(Xv[:, cols], yv), feature_names=names
            )
            metrics = evaluate(model, Xte[:, cols], yte) if model.trees_ else \
                evaluate_predictions(yte, model.predict(Xte[:, cols]))
        rows.append({"feature_set": set_name, **metrics.as_row()})
    return rows


def select_simulation_sample(
    matrix: FeatureMatrix, n: int, seed: int, require_false=SIMULATION_FLAGS
) -> list[str]:
    """Seeded uniform sample (no replacement) of campaigns missing every strategy."""
    cols = [matrix.column_index(c) for c in require_false]
    mask = np.all(matrix.values[:, cols] == 0.0, axis=1)
    eligible = [cid for cid, ok in zip(matrix.ids, mask) if ok]
    if n > len(eligible):
        raise SchemaError(f"only {len(eligible)} eligible campaigns, need {n}")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(eligible), size=n, replace=False)
    return [eligible[i] for i in chosen]


@dataclass
class SimulationRow:
    campaign_id: str
    funded: bool
    prob_before: float
    prob_after: float
    lift: float
    words_before: int
    words_after: int
    augmented_text: str


@dataclass
class SimulationReport:
    mode: str
    rows: list[SimulationRow]
    excluded: list[str]
    aggregates: dict
    robustness: dict[str, list[dict]]
    heterogeneity: dict[str, list[dict]]

    def row_table(self) -> list[dict]:
        return [
            {"campaign_id": r.campaign_id, "funded": int(r.funded),
             "prob_before": r.prob_before, "prob_after": r.prob_after, "lift": r.lift,
             "words_before": r.words_before, "words_after": r.words_after}
            for r in self.rows
        ]


def _regression_rows(fit: stats.OlsFit, names) -> list[dict]:
    rows = []
    labels = ("intercept", *names)
    for name, coef, se, p in zip(labels, fit.coefficients, fit.std_errors, fit.p_values):
        rows.append({
            "term": name, "coefficient": coef, "std_error": se,
            "p_value": p, "stars": stats.significance_stars(p),
        })
    rows.append({"term": "r_squared", "coefficient": fit.r_squared,
                 "std_error": "", "p_value": "", "stars": ""})
    rows.append({"term": "n_obs", "coefficient": fit.n_obs,
                 "std_error": "", "p_value": "", "stars": ""})
    return rows


def _zscore(x: np.ndarray) -> np.ndarray:
    sd = x.std(ddof=1)
    return (x - x.mean()) / sd if sd > 0 else x - x.mean()


def run_counterfactual(
    sample_ids: list[str],
    model: GbdtClassifier,
    matrix: FeatureMatrix,
    records_by_id: dict[str, CampaignRecord],
    resources: FeatureResources,
    client: LlmClient,
    mode: str = "three",
) -> SimulationReport:
    """Augment each sampled description, rescore, and regress the movement.

    Only the 116 textual columns are recomputed on the augmented text; every
    non-textual column is carried over bit-identical. Prefix violations are
    logged, excluded, and counted.
    """
    if mode not in ("three", "add_gratitude", "minus_gratitude"):
        raise SchemaError(f"unknown simulation mode {mode!r}")
    textual_idx = [j for j, g in enumerate(matrix.groups) if g == GROUP_TEXTUAL]
    lexicon_names = resources.text.feature_names()

    rows: list[SimulationRow] = []
    excluded: list[str] = []
    for cid in sample_ids:
        record = records_by_id[cid]
        try:
            result = augment_three(record.description, client)
        except PrefixViolationError:
            excluded.append(cid)
            continue
        augmented = getattr(result, "correct_three" if mode == "three" else mode)
        original_row = matrix.row_by_id(cid).copy()
        new_row = original_row.copy()

        lex = extract_lexicon_features(augmented, resources.text)
        gpt = extract_gpt_features(augmented, client)
        textual_values = np.concatenate([
            lex.values, [1.0 if f else 0.0 for f in gpt.flag_values()],
        ])
        assert len(textual_values) == len(textual_idx)
        new_row[textual_idx] = textual_values

        p_before = float(model.predict_proba(original_row[None, :])[0])
        p_after = float(model.predict_proba(new_row[None, :])[0])
        rows.append(SimulationRow(
            campaign_id=cid, funded=record.funded,
            prob_before=p_before, prob_after=p_after, lift=p_after - p_before,
            words_before=tokenize(record.description).word_count,
            words_after=tokenize(augmented).word_count,
            augmented_text=augmented,
        ))
    if not rows:
        raise SchemaError("no simulation rows survived augmentation")

    funded = np.asarray([r.funded for r in rows])
    before = np.asarray([r.prob_before for r in rows])
    after = np.asarray([r.prob_after for r in rows])
    lift = after - before

    def _mean(x):
        return float(np.mean(x)) if len(x) else float("nan")

    aggregates = {
        "mode": mode,
        "n": len(rows),
        "n_excluded_prefix": len(excluded),
        "mean_before": _mean(before),
        "mean_after": _mean(after),
        "mean_lift": _mean(lift),
        "share_improved": float(np.mean(lift > 0)),
        "mean_before_funded": _mean(before[funded]),
        "mean_after_funded": _mean(after[funded]),
        "mean_before_unfunded": _mean(before[~funded]),
        "mean_after_unfunded": _mean(after[~funded]),
    }

    # Probability-on-augmentation robustness regression, word count controlled.
    y_stack = np.concatenate([before, after])
    aug_flag = np.concatenate([np.zeros(len(rows)), np.ones(len(rows))])
    words = np.concatenate([
        [r.words_before for r in rows], [r.words_after for r in rows],
    ]).astype(np.float64)
    words_z = _zscore(words)
    subset_masks = {
        "all": np.ones(2 * len(rows), dtype=bool),
        "funded": np.concatenate([funded, funded]),
        "unfunded": np.concatenate([~funded, ~funded]),
    }
    robustness = {}
    for name, mask in subset_masks.items():
        if mask.sum() < 4:
            continue
        X = np.column_stack([aug_flag[mask], words_z[mask]])
        fit = stats.fit_ols(X, y_stack[mask])
        robustness[name] = _regression_rows(fit, ("gpt_augmentation", "word_count_z"))

    # Heterogeneous lift: education share, then with campaign configuration.
    edu = matrix.column("acs_pct_bachelor_or_higher").copy()
    idx = [matrix.ids.index(r.campaign_id) for r in rows]
    edu_rows = edu[idx]
    med = np.nanmedian(edu_rows)
    edu_rows = np.where(np.isnan(edu_rows), med, edu_rows)
    goal = matrix.column("goal_amount")[idx] / 1000.0
    male = matrix.column("organizer_male")[idx]
    beneficiary = matrix.column("has_beneficiary")[idx]
    heterogeneity = {
        "education": _regression_rows(
            stats.fit_ols(edu_rows.reshape(-1, 1), lift), ("pct_bachelor_or_higher",)
        ),
        "with_configuration": _regression_rows(
            stats.fit_ols(np.column_stack([edu_rows, goal, male, beneficiary]), lift),
            ("pct_bachelor_or_higher", "goal_amount_1000s", "organizer_male", "has_beneficiary"),
        ),
    }
    return SimulationReport(
        mode=mode, rows=rows, excluded=excluded, aggregates=aggregates,
        robustness=robustness, heterogeneity=heterogeneity,
    )


@dataclass
class ExperimentDesign:
    campaigns: list[dict]
    randomization_log: list[dict]

    def ids(self) -> list[str]:
        return [c["campaign_id"] for c in self.campaigns]


def design_experiment(
    sim: SimulationReport,
    records_by_id: dict[str, CampaignRecord],
    client: LlmClient,
    seed: int,
    min_words: int = 180,
) -> ExperimentDesign:
    """Pick 16 campaigns (2 per lift-quartile stratum within funded/unfunded).

    Originals shorter than the word floor are excluded before stratification;
    the length-matched neutral extension is generated for each selection.
    """
    eligible = [r for r in sim.rows if r.words_before > min_words]
    rng = np.random.default_rng(seed)
    log: list[dict] = []
    chosen: list[dict] = []
    for funded_flag in (True, False):
        group = [r for r in eligible if r.funded == funded_flag]
        if len(group) < 8:
            raise SchemaError(
                f"only {len(group)} eligible {'funded' if funded_flag else 'unfunded'} "
                f"campaigns above {min_words} words; need 8"
            )
        lifts = np.asarray([r.lift for r in group])
        qs = np.quantile(lifts, [0.25, 0.5, 0.75])
        strata: dict[int, list[SimulationRow]] = {0: [], 1: [], 2: [], 3: []}
        for r, lv in zip(group, lifts):
            strata[int(np.searchsorted(qs, lv, side="left"))].append(r)
        for stratum, members in sorted(strata.items()):
            if len(members) < 2:
                raise SchemaError(
                    f"stratum {stratum} ({'funded' if funded_flag else 'unfunded'}) "
                    f"has {len(members)} campaigns; need 2"
                )
            member_ids = [m.campaign_id for m in members]
            picks = rng.choice(len(members), size=2, replace=False)
            log.append({
                "group": "funded" if funded_flag else "unfunded",
                "stratum": stratum,
                "candidates": member_ids,
                "chosen": [member_ids[i] for i in picks],
            })
            for i in picks:
                row = members[i]
                original = records_by_id[row.campaign_id].description
                target = max(1, row.words_after - row.words_before)
                extended = extend_neutral(original, target, client)
                chosen.append({
                    "campaign_id": row.campaign_id,
                    "funded": bool(funded_flag),
                    "stratum": int(stratum),
                    "lift": row.lift,
                    "original": original,
                    "augmented": row.augmented_text,
                    "extended": extended,
                })
    return ExperimentDesign(campaigns=chosen, randomization_log=log)


CHOICE_FIELDS = (
    "participant_id", "pair_id", "campaign_id", "comparison", "first_shown",
    "own_choice", "public_choice", "passed_general_attention",
    "passed_campaign_attention",
)
COMPARISON_TYPES = {
    "augmented_vs_original": ("augmented", "original"),
    "augmented_vs_extended": ("augmented", "extended"),
    "extended_vs_original": ("extended", "original"),
}
KS_ATTRIBUTES = ("age", "gender", "donated_last_year", "donated_amount")


def _variant_attrs(variant: str) -> np.ndarray:
    return np.asarray([
        1.0 if variant == "augmented" else 0.0,
        1.0 if variant == "extended" else 0.0,
    ])


def _clogit_table(records: list[dict], choice_key: str) -> tuple[list[dict], dict]:
    pairs = []
    for rec in records:
        focal, other = COMPARISON_TYPES[rec["comparison"]]
        first = rec["first_shown"]
        second = other if first == focal else focal
        chosen = 0 if rec[choice_key] == first else 1
        pairs.append((chosen, _variant_attrs(first), _variant_attrs(second)))
    fit = stats.fit_conditional_logit(pairs, feature_names=("gpt_augmentation", "gpt_extension"))
    se = fit.standard_errors()
    wald_stat, wald_p = stats.wald_test(fit, np.asarray([1.0, -1.0]))
    table = []
    for name, coef, s in zip(fit.feature_names, fit.coefficients, se):
        z = coef / s if s > 0 else float("inf")
        p = stats.normal_p_two_sided(z)
        table.append({"term": name, "coefficient": float(coef), "std_error": float(s),
                      "p_value": p, "stars": stats.significance_stars(p)})
    table.append({"term": "wald_b1_eq_b2_stat", "coefficient": wald_stat,
                  "std_error": "", "p_value": wald_p,
                  "stars": stats.significance_stars(wald_p)})
    table.append({"term": "n_pairs", "coefficient": len(pairs),
                  "std_error": "", "p_value": "", "stars": ""})
    extras = {
        "mean_predicted_first_prob": float(np.mean(fit.pair_probabilities)),
        "wald_stat": wald_stat, "wald_p": wald_p,
    }
    return table, extras


def analyze_experiment(records: list[dict]) -> dict:
    """Preference shares, conditional logits, donor robustness, and KS checks."""
    for i, rec in enumerate(records):
        missing = [f for f in CHOICE_FIELDS if f not in rec]
        if missing:
            raise SchemaError(f"choice record {i} missing fields {missing}")
        if rec["comparison"] not in COMPARISON_TYPES:
            raise SchemaError(f"choice record {i}: unknown comparison {rec['comparison']!r}")
        focal, other = COMPARISON_TYPES[rec["comparison"]]
        for key in ("first_shown", "own_choice", "public_choice"):
            if rec[key] not in (focal, other):
                raise SchemaError(f"choice record {i}: bad {key} {rec[key]!r}")

    n_initial = len(records)
    failed_general = {r["participant_id"] for r in records if not r["passed_general_attention"]}
    kept = [r for r in records if r["participant_id"] not in failed_general]
    n_after_general = len(kept)
    kept = [r for r in kept if r["passed_campaign_attention"]]
    exclusions = {
        "records_initial": n_initial,
        "participants_failed_general": len(failed_general),
        "records_after_general": n_after_general,
        "records_failed_campaign": n_after_general - len(kept),
        "records_analyzed": len(kept),
    }
    if not kept:
        raise SchemaError("no valid choice records after attention exclusions")

    share_rows = []
    for comp, (focal, other) in COMPARISON_TYPES.items():
        subset = [r for r in kept if r["comparison"] == comp]
        if not subset:
            continue
        n = len(subset)
        for key, label in (("own_choice", "own"), ("public_choice", "public")):
            p = sum(1 for r in subset if r[key] == focal) / n
            share_rows.append({
                "comparison": comp, "preference": label, "focal": focal,
                "share": p, "std_error": float(np.sqrt(p * (1 - p) / n)), "n": n,
            })

    own_table, own_extras = _clogit_table(kept, "own_choice")
    public_table, public_extras = _clogit_table(kept, "public_choice")
    donors = [r for r in kept if int(r.get("donated_last_year", 0)) >= 1]
    donor_tables = {}
    if len(donors) >= 10:
        donor_tables["donors_own"], _ = _clogit_table(donors, "own_choice")
        donor_tables["donors_public"], _ = _clogit_table(donors, "public_choice")

    ks_rows = []
    comps = sorted(COMPARISON_TYPES)
    for attr in KS_ATTRIBUTES:
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                a = [float(r[attr]) for r in kept if r["comparison"] == comps[i] and attr in r]
                b = [float(r[attr]) for r in kept if r["comparison"] == comps[j] and attr in r]
                if not a or not b:
                    continue
                d, p = stats.ks_test(a, b)
                ks_rows.append({
                    "attribute": attr, "comparison_a": comps[i], "comparison_b": comps[j],
                    "ks_d": d, "p_value": p,
                })

    return {
        "exclusions": exclusions,
        "preference_shares": share_rows,
        "clogit_own": own_table,
        "clogit_public": public_table,
        **donor_tables,
        "clogit_summary": {"own": own_extras, "public": public_extras},
        "ks_randomization": ks_rows,
    }


# -- report emission ----------------------------------------------------------

def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    fieldnames = list(rows[0].keys())
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v)
                             for k, v in row.items()})


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit_reports(bundle: dict, outdir: str | Path) -> dict:
    """Write every table in the bundle; hash what was written, mark the rest.

    CSV for row lists, JSON for everything else. Returns the manifest dict
    (also written to manifest.json).
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write_probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as e:
        raise SchemaError(f"output directory not writable: {e}") from e

    files: dict[str, str] = {}
    absent: list[str] = []
    for name, table in sorted(bundle.items()):
        if table is None:
            absent.append(name)
            continue
        if isinstance(table, list) and (not table or isinstance(table[0], dict)):
            path = outdir / f"{name}.csv"
            _write_csv(path, table)
        else:
            path = outdir / f"{name}.json"
            path.write_text(json.dumps(table, indent=2, sort_keys=True), encoding="utf-8")
        files[path.name] = _sha256(path)
    manifest = {"files": files, "absent": sorted(absent)}
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
    )
    return manifest


def regression_study(study: TrainedStudy, n_pcs: int = 5, top_textual: int = 10) -> dict:
    """Logistic average-marginal-effects table for the outcome regression.

    Regressors: campaign configuration, the two pandemic statistics, the top
    principal components of the demographics block, and the highest-gain
    textual features. Continuous columns are z-scored, flags stay 0/1,
    missing demographics are median-imputed.
    """
    matrix, labels = study.matrix, study.labels
    demo_cols, _ = matrix.select_groups({GROUP_DEMOGRAPHICS})
    med = np.nanmedian(demo_cols, axis=0)
    demo_filled = np.where(np.isnan(demo_cols), med, demo_cols)
    n_pcs = min(n_pcs, demo_filled.shape[1], len(labels) - 1)
    pca_model = stats.pca(demo_filled, k=n_pcs)
    pcs = pca_model.transform(demo_filled)

    importances = gain_importance(study.model)
    textual = [
        (name, importances.get(name, 0.0))
        for name, group in zip(matrix.names, matrix.groups)
        if group == GROUP_TEXTUAL
    ]
    textual.sort(key=lambda kv: (-kv[1], kv[0]))
    top_names = [name for name, _ in textual[:top_textual]]

    cols = []
    names: list[str] = []
    kinds: list[str] = []
    for name in ("goal_amount",):
        cols.append(_zscore(matrix.column(name)))
        names.append(f"{name}_z")
        kinds.append("continuous")
    for name in ("organizer_male", "has_beneficiary", "gofundme_organized"):
        cols.append(matrix.column(name))
        names.append(name)
        kinds.append("binary")
    for name in ("covid_cases_7d", "covid_share_of_us"):
        cols.append(_zscore(matrix.column(name)))
        names.append(f"{name}_z")
        kinds.append("continuous")
    for j in range(n_pcs):
        cols.append(pcs[:, j])
        names.append(f"acs_pc{j + 1}")
        kinds.append("continuous")
    for name in top_names:
        col = matrix.column(name)
        if set(np.unique(col[~np.isnan(col)])) <= {0.0, 1.0}:
            cols.append(col)
            kinds.append("binary")
            names.append(name)
        else:
            cols.append(_zscore(col))
            kinds.append("continuous")
            names.append(f"{name}_z")
    X = np.column_stack(cols)
    fit = stats.fit_logistic(X, labels, feature_names=tuple(names))
    ame = stats.average_marginal_effects(fit, X, kinds)
    rows = [
        {"term": r.name, "kind": r.kind, "ame": r.estimate, "std_error": r.std_error,
         "p_value": r.p_value, "stars": stats.significance_stars(r.p_value)}
        for r in ame
    ]
    rows.append({"term": "mcfadden_r2", "kind": "", "ame": fit.mcfadden_r2,
                 "std_error": "", "p_value": "", "stars": ""})
    rows.append({"term": "n_obs", "kind": "", "ame": len(labels),
                 "std_error": "", "p_value": "", "stars": ""})
    return {
        "table": rows,
        "pca_explained_variance": pca_model.explained_variance_ratios[:n_pcs].tolist(),
    }
