"""Extraction and auditing of the 11 LLM-derived semantic flags."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SchemaError
from .client import LlmClient, render_prompt
from .schema import FEATURE_FIELDS, FLAG_ORDER, NO_TAG, TAG_FIELD


@dataclass(frozen=True)
class GptFeatureSet:
    """The 11 boolean flags plus per-flag explanations and the campaign tag."""

    employees_mentioned: bool
    rent_mentioned: bool
    business_longer_2y: bool
    new_business: bool
    match_grant_mentioned: bool
    gratitude_expressed: bool
    urgency_explained: bool
    social_comparison_better: bool
    self_comparison_worse: bool
    small_business_specified: bool
    extrinsic_incentive: bool
    explanations: dict[str, str] = field(default_factory=dict)
    tag: str = NO_TAG

    def as_flag_dict(self) -> dict[str, bool]:
        return {name: getattr(self, name) for name in FLAG_ORDER}

    def flag_values(self) -> tuple[bool, ...]:
        return tuple(getattr(self, name) for name in FLAG_ORDER)


def _coerce_flag(value, field_name: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().upper() in ("TRUE", "FALSE"):
        return value.strip().upper() == "TRUE"
    raise SchemaError(f"field {field_name!r} is not a boolean: {value!r}")


def _validate_feature_reply(reply: dict) -> None:
    missing = [f for f, _, _ in FEATURE_FIELDS if f not in reply]
    if missing:
        raise SchemaError(f"feature reply missing fields {missing}")
    if TAG_FIELD not in reply:
        raise SchemaError(f"feature reply missing field {TAG_FIELD!r}")


def extract_gpt_features(description: str, client: LlmClient) -> GptFeatureSet:
    """Run the 11-task prompt on one description and parse the JSON verdicts."""
    prompt = render_prompt("feature_tasks", text=description)
    reply = client.complete_json(prompt, validate=_validate_feature_reply)
    flags = {}
    explanations = {}
    for reply_field, expl_field, attr in FEATURE_FIELDS:
        flags[attr] = _coerce_flag(reply[reply_field], reply_field)
        explanations[attr] = str(reply.get(expl_field, ""))
    return GptFeatureSet(**flags, explanations=explanations, tag=str(reply[TAG_FIELD]))


def extract_gpt_features_many(descriptions, client: LlmClient) -> list[GptFeatureSet]:
    """Batch extraction, concurrent up to the client's in-flight limit."""
    return client.map_ordered(lambda d: extract_gpt_features(d, client), list(descriptions))


def audit_agreement(
    llm_labels: list[GptFeatureSet], human_labels: list[GptFeatureSet]
) -> dict[str, float | None]:
    """Per-flag Cohen's kappa between LLM and human label sets.

    Flags where kappa is undefined (both raters constant on different values
    cannot happen for kappa; the truly undefined chance-agreement-1 case) are
    reported as None.
    """
    from ..stats import cohens_kappa

    if len(llm_labels) != len(human_labels):
        raise SchemaError(
            f"label lists differ in length: {len(llm_labels)} vs {len(human_labels)}"
        )
    if len(llm_labels) < 2:
        raise SchemaError("audit requires at least 2 labeled campaigns")
    report: dict[str, float | None] = {}
    for flag in FLAG_ORDER:
        a = [getattr(s, flag) for s in llm_labels]
        b = [getattr(s, flag) for s in human_labels]
        kappa = cohens_kappa(a, b)
        report[flag] = None if kappa != kappa else kappa
    return report
