"""HTTP facade: score a draft, augment it, report model info and liveness.

Responses depend only on the request and the artifacts loaded at startup;
errors use a uniform {code, message, detail} envelope.
"""

from __future__ import annotations

import hashlib
import json
import threading
from datetime import date
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .context import assemble_feature_matrix
from .corpus import CampaignRecord
from .errors import ProviderError, SchemaError
from .gbdt import GbdtClassifier, gain_importance, group_importance
from .llm.augment import PrefixViolationError, augment_three
from .llm.client import LlmClient
from .pipeline import StudyConfig, load_resources

CHECKLIST_FLAGS = ("gratitude_expressed", "urgency_explained", "match_grant_mentioned")


class DraftRequest(BaseModel):
    description: str = Field(min_length=1)
    goal_amount: float = Field(gt=0)
    organizer_male: bool = False
    has_beneficiary: bool = False
    city: str = ""
    state: str = ""
    created_date: date | None = None


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


class ServiceState:
    """Model + resources loaded once and swapped atomically on reload."""

    def __init__(self, cfg: StudyConfig, model_path: Path):
        self.cfg = cfg
        self.model_path = Path(model_path)
        self._lock = threading.Lock()
        self.model: GbdtClassifier | None = None
        self.resources = None
        self.client: LlmClient | None = None
        self.config_hash = ""
        self.load()

    def load(self) -> None:
        resources = load_resources(self.cfg)
        client = LlmClient(self.cfg.llm)
        model = None
        if self.model_path.exists():
            model = GbdtClassifier.load(self.model_path)
        digest = hashlib.sha256(json.dumps({
            "seed": self.cfg.seed,
            "corpus": str(self.cfg.corpus_path),
            "model_path": str(self.model_path),
        }, sort_keys=True).encode()).hexdigest()[:16]
        with self._lock:
            self.resources = resources
            self.client = client
            self.model = model
            self.config_hash = digest

    def score_row(self, req: DraftRequest) -> tuple[np.ndarray, dict]:
        record = CampaignRecord(
            id="draft", title="draft", description=req.description,
            created_date=req.created_date or date.today(),
            city=req.city, state=req.state, goal_amount=req.goal_amount,
            organizer_male=req.organizer_male, has_beneficiary=req.has_beneficiary,
            gofundme_organized=False,
        )
        matrix = assemble_feature_matrix(
            [record], self.resources, self.client, allow_missing_context=True
        )
        return matrix.values[0], dict(zip(matrix.names, matrix.values[0]))

    def diagnose(self, req: DraftRequest) -> dict:
        row, named = self.score_row(req)
        prob = float(self.model.predict_proba(row[None, :])[0])
        checklist = {flag: bool(named[f"gpt_{flag}"]) for flag in CHECKLIST_FLAGS}
        try:
            importances = gain_importance(self.model)
            top = sorted(importances.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
        except ValueError:
            top = []
        return {
            "predicted_probability": prob,
            "checklist": checklist,
            "top_feature_contributions": [
                {"feature": name, "gain_share": share} for name, share in top
            ],
            "lexical": {
                "word_count": int(named["word_count"]),
                "fk_grade": named["fk_grade"],
                "contains_spam": bool(named["contains_spam"]),
            },
        }


def create_app(cfg: StudyConfig, model_path: str | Path) -> FastAPI:
    app = FastAPI(title="fundlift", version="0.1.0")
    state = ServiceState(cfg, Path(model_path))
    app.state.service = state

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", "request failed validation", exc.errors())

    @app.exception_handler(SchemaError)
    async def _schema_handler(request: Request, exc: SchemaError):
        return _error(400, "invalid_request", str(exc))

    def _model_missing() -> JSONResponse:
        return _error(503, "model_unavailable", "no trained model is loaded",
                      {"model_path": str(state.model_path)})

    @app.post("/score")
    def score(req: DraftRequest):
        if state.model is None:
            return _model_missing()
        return state.diagnose(req)

    @app.post("/augment")
    def augment(req: DraftRequest):
        if state.model is None:
            return _model_missing()
        before = state.diagnose(req)
        try:
            result = augment_three(req.description, state.client)
        except PrefixViolationError as e:
            return _error(502, "prefix_violation", str(e), {"raw_output": e.raw_output})
        except ProviderError as e:
            return _error(502, "provider_failure", str(e), {"retry_after_seconds": 30})
        after_req = req.model_copy(update={"description": result.correct_three})
        after = state.diagnose(after_req)
        return {"augmented_text": result.correct_three, "before": before, "after": after}

    @app.get("/model/info")
    def model_info():
        if state.model is None:
            return _model_missing()
        model = state.model
        try:
            shares = group_importance(
                gain_importance(model),
                {n: g for n, g in zip(model.feature_names_, _feature_groups(model))},
            )
        except ValueError:
            shares = {}
        return {
            "feature_count": model.n_features_,
            "group_importance": shares,
            "metadata": {
                "config_hash": state.config_hash,
                "params": model.get_params(),
                "n_trees": len(model.trees_),
                "best_iteration": model.best_iteration_,
            },
        }

    def _feature_groups(model: GbdtClassifier):
        from .context import feature_schema

        names, groups = feature_schema(state.resources.text)
        mapping = dict(zip(names, groups))
        return [mapping.get(n, "other") for n in model.feature_names_]

    @app.get("/healthz")
    def healthz():
        resources_ok = {
            "text": state.resources is not None,
            "acs": state.resources is not None and len(state.resources.acs.rows) > 0,
            "covid": state.resources is not None and len(state.resources.covid.by_state) > 0,
        }
        model_loaded = state.model is not None
        return {
            "status": "ok" if model_loaded and all(resources_ok.values()) else "degraded",
            "model_loaded": model_loaded,
            "resources": resources_ok,
        }

    @app.post("/reload")
    def reload():
        state.load()
        return {"reloaded": True, "model_loaded": state.model is not None}

    return app
