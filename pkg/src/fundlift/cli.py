"""Command-line entry points for the full study pipeline and the service.

Exit codes: 0 success, 2 validation error, 3 LLM provider failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline as pl
from .corpus import save_campaigns
from .errors import ProviderError, SchemaError
from .gbdt import gain_importance
from .llm.client import LlmClient


class _Ctx:
    def __init__(self, config: str | None, seed: int | None, mock_llm: bool):
        self.config_path = config
        self.seed = seed
        self.mock_llm = mock_llm
        self._cfg = None

    @property
    def cfg(self) -> pl.StudyConfig:
        if self._cfg is None:
            if not self.config_path:
                raise SchemaError("--config is required for this command")
            self._cfg = pl.load_study_config(
                self.config_path, seed=self.seed, mock_llm=self.mock_llm
            )
        return self._cfg


def _run(fn):
    try:
        fn()
    except ProviderError as e:
        click.echo(f"provider failure: {e}", err=True)
        sys.exit(3)
    except (SchemaError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)


@click.group()
@click.option("--config", type=click.Path(), default=None, help="Study config JSON.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--mock-llm", is_flag=True, help="Force the deterministic mock provider.")
@click.pass_context
def main(ctx, config, seed, mock_llm):
    """Crowdfunding success prediction, explanation, and augmentation toolkit."""
    ctx.obj = _Ctx(config, seed, mock_llm)


@main.command()
@click.pass_obj
def ingest(obj):
    """Load, validate, and blank-filter the corpus; write the clean JSONL."""
    def go():
        cfg = obj.cfg
        records, report = pl.ingest_corpus(cfg)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        save_campaigns(records, cfg.output_dir / "corpus_clean.jsonl")
        (cfg.output_dir / "ingest_report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True), encoding="utf-8"
        )
        click.echo(f"kept {report['kept']} of {report['loaded']} campaigns")
    _run(go)


@main.command()
@click.pass_obj
def features(obj):
    """Assemble the 168-column feature matrix and write matrix.csv."""
    def go():
        cfg = obj.cfg
        records, _ = pl.ingest_corpus(cfg)
        resources = pl.load_resources(cfg)
        client = LlmClient(cfg.llm)
        matrix = pl.build_matrix(cfg, records, resources, client)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        matrix.save_csv(cfg.output_dir / "matrix.csv")
        counts = matrix.group_counts()
        click.echo(f"matrix {matrix.values.shape[0]}x{matrix.values.shape[1]} ({counts})")
    _run(go)


@main.command()
@click.pass_obj
def train(obj):
    """Tune, train, evaluate with baselines; write model and report tables."""
    def go():
        cfg = obj.cfg
        study = pl.run_training_study(cfg)
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        study.model.save(out / "model.json")
        study.matrix.save_csv(out / "matrix.csv")
        save_campaigns(study.records, out / "corpus_clean.jsonl")
        pl.emit_reports({
            "training_metrics": study.metrics_rows,
            "importance": study.importance_rows,
            "group_importance": study.group_rows,
            "leaderboard": study.leaderboard_rows,
            "split_ids": study.split_ids,
            "city_funded_rates": pl.city_funded_rates(study.records),
        }, out)
        click.echo(f"trained; best params {study.best_params.as_dict()}")
    _run(go)


@main.command()
@click.pass_obj
def ablate(obj):
    """Four-feature-set ablation on the identical split; write ablation.csv."""
    def go():
        cfg = obj.cfg
        study = pl.load_study_artifacts(cfg) or pl.run_training_study(cfg)
        rows = pl.run_ablation(cfg, study)
        pl.emit_reports({"ablation": rows}, cfg.output_dir)
        click.echo(f"ablation rows: {len(rows)}")
    _run(go)


@main.command()
@click.pass_obj
def explain(obj):
    """Importance tables plus the marginal-effects regression report."""
    def go():
        cfg = obj.cfg
        study = pl.load_study_artifacts(cfg) or pl.run_training_study(cfg)
        reg = pl.regression_study(study)
        imp = gain_importance(study.model)
        groups = study.matrix.groups_by_name()
        importance_rows, group_rows = pl.importance_tables(study.model, study.matrix)
        pl.emit_reports({
            "importance": importance_rows,
            "group_importance": group_rows,
            "regression_ame": reg["table"],
            "regression_meta": {"pca_explained_variance": reg["pca_explained_variance"]},
        }, cfg.output_dir)
        top = max(imp, key=imp.get)
        click.echo(f"top feature: {top} ({imp[top]:.2%}) of group {groups[top]}")
    _run(go)


@main.command()
@click.pass_obj
def simulate(obj):
    """Counterfactual augmentation study over a seeded eligible sample."""
    def go():
        cfg = obj.cfg
        study = pl.load_study_artifacts(cfg) or pl.run_training_study(cfg)
        sample = pl.select_simulation_sample(study.matrix, cfg.simulation_n, cfg.seed)
        records_by_id = {r.id: r for r in study.records}
        client = LlmClient(cfg.llm)
        resources = pl.load_resources(cfg)
        report = pl.run_counterfactual(
            sample, study.model, study.matrix, records_by_id, resources, client,
            mode=cfg.simulation_mode,
        )
        bundle = {
            "simulation_rows": report.row_table(),
            "simulation_summary": report.aggregates,
            "heterogeneity_education": report.heterogeneity["education"],
            "heterogeneity_with_configuration": report.heterogeneity["with_configuration"],
        }
        for name, rows in report.robustness.items():
            bundle[f"robustness_{name}"] = rows
        pl.emit_reports(bundle, cfg.output_dir)
        agg = report.aggregates
        click.echo(
            f"mean probability {agg['mean_before']:.3f} -> {agg['mean_after']:.3f}; "
            f"{agg['share_improved']:.0%} improved"
        )
    _run(go)


@main.command("design-experiment")
@click.pass_obj
def design_experiment_cmd(obj):
    """Stratified 16-campaign experiment design with all three variants."""
    def go():
        cfg = obj.cfg
        study = pl.load_study_artifacts(cfg) or pl.run_training_study(cfg)
        sample = pl.select_simulation_sample(study.matrix, cfg.simulation_n, cfg.seed)
        records_by_id = {r.id: r for r in study.records}
        client = LlmClient(cfg.llm)
        resources = pl.load_resources(cfg)
        sim = pl.run_counterfactual(
            sample, study.model, study.matrix, records_by_id, resources, client,
            mode=cfg.simulation_mode,
        )
        design = pl.design_experiment(
            sim, records_by_id, client, cfg.seed, min_words=cfg.experiment_min_words
        )
        pl.emit_reports({
            "experiment_design": {"campaigns": design.campaigns},
            "experiment_randomization_log": {"draws": design.randomization_log},
        }, cfg.output_dir)
        click.echo(f"designed experiment with {len(design.campaigns)} campaigns")
    _run(go)


@main.command("analyze-experiment")
@click.argument("records_path", type=click.Path(exists=True))
@click.pass_obj
def analyze_experiment_cmd(obj, records_path):
    """Analyze participant choice records (JSON lines)."""
    def go():
        records = []
        with open(records_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        bundle = pl.analyze_experiment(records)
        cfg = obj.cfg
        pl.emit_reports(bundle, cfg.output_dir)
        own = bundle["clogit_summary"]["own"]
        click.echo(
            f"analyzed {bundle['exclusions']['records_analyzed']} pairs; "
            f"Wald p={own['wald_p']:.4g}"
        )
    _run(go)


@main.command()
@click.pass_obj
def report(obj):
    """Re-hash everything present in the output directory into the manifest."""
    def go():
        cfg = obj.cfg
        out = cfg.output_dir
        if not out.exists():
            raise SchemaError(f"output directory {out} does not exist")
        import hashlib
        files = {}
        for p in sorted(out.iterdir()):
            if p.is_file() and p.name != "manifest.json":
                files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
        manifest = {"files": files, "absent": []}
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
        )
        click.echo(f"manifest covers {len(files)} files")
    _run(go)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8200, show_default=True, type=int)
@click.option("--model-path", type=click.Path(), default=None,
              help="Trained model JSON (defaults to <output_dir>/model.json).")
@click.pass_obj
def serve(obj, host, port, model_path):
    """Run the scoring/augmentation HTTP service."""
    def go():
        import uvicorn

        from .service import create_app

        cfg = obj.cfg
        path = Path(model_path) if model_path else cfg.output_dir / "model.json"
        app = create_app(cfg, model_path=path)
        uvicorn.run(app, host=host, port=port, log_level="warning")
    _run(go)


@main.command()
@click.argument("directory", type=click.Path())
@click.option("--n", default=200, show_default=True, type=int)
@click.option("--synth-seed", default=20200122, show_default=True, type=int)
def synth(directory, n, synth_seed):
    """Write the bundled synthetic mini corpus and context tables."""
    def go():
        from .synth import write_minicorpus

        paths = write_minicorpus(directory, n=n, seed=synth_seed)
        click.echo("; ".join(f"{k}: {v}" for k, v in paths.items()))
    _run(go)


if __name__ == "__main__":
    main()
