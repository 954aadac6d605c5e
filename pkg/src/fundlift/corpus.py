"""Campaign ingestion, validation, labeling, and date-based splitting.

Canonical storage is JSON-lines, one campaign per line. CSV import covers
the flat fields; donations then come from a companion CSV keyed by id.
Dates are ISO-8601 calendar dates throughout.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import date
from pathlib import Path

from .errors import SchemaError

REQUIRED_FIELDS = (
    "id", "title", "description", "created_date", "city", "state",
    "goal_amount", "organizer_male", "has_beneficiary", "gofundme_organized",
)


@dataclass
class CampaignRecord:
    """One crowdfunding campaign; ``funded`` is derived from donations."""

    id: str
    title: str
    description: str
    created_date: date | None
    city: str
    state: str
    goal_amount: float
    organizer_male: bool
    has_beneficiary: bool
    gofundme_organized: bool
    county: str | None = None
    donations: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.goal_amount <= 0:
            raise SchemaError(f"campaign {self.id}: goal_amount must be positive")
        for ts, amount in self.donations:
            if amount <= 0:
                raise SchemaError(f"campaign {self.id}: donation amount must be positive")

    @property
    def funded(self) -> bool:
        return len(self.donations) > 0

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["created_date"] = self.created_date.isoformat() if self.created_date else None
        d["donations"] = [[ts, amount] for ts, amount in self.donations]
        d["funded"] = self.funded
        return d


@dataclass(frozen=True)
class SplitSpec:
    """Date boundaries for the train/validation/test partition."""

    window_start: date
    train_end: date
    val_end: date
    window_end: date

    def __post_init__(self) -> None:
        if not (self.window_start < self.train_end < self.val_end < self.window_end):
            raise SchemaError(
                "split boundaries must satisfy window_start < train_end < val_end < window_end"
            )


@dataclass(frozen=True)
class ValidationVerdict:
    """LLM verdict on whether a campaign is about a small business."""

    business: bool
    business_explanation: str
    owner_support: bool | None = None
    owner_support_explanation: str | None = None

    def __post_init__(self) -> None:
        if self.business and self.owner_support is not None:
            raise SchemaError("owner_support is only present when business is false")


def _parse_date(value, where: str) -> date | None:
    if value in (None, ""):
        return None
    try:
        return date.fromisoformat(str(value))
    except ValueError as e:
        raise SchemaError(f"{where}: bad date {value!r}") from e


def _record_from_dict(d: dict, where: str) -> CampaignRecord:
    missing = [f for f in REQUIRED_FIELDS if f not in d]
    if missing:
        raise SchemaError(f"{where}: missing required fields {missing}")
    donations = []
    for item in d.get("donations", []) or []:
        ts, amount = item
        donations.append((str(ts), float(amount)))
    try:
        return CampaignRecord(
            id=str(d["id"]),
            title=str(d["title"]),
            description=str(d["description"]),
            created_date=_parse_date(d["created_date"], where),
            city=str(d["city"]),
            state=str(d["state"]),
            goal_amount=float(d["goal_amount"]),
            organizer_male=bool(d["organizer_male"]),
            has_beneficiary=bool(d["has_beneficiary"]),
            gofundme_organized=bool(d["gofundme_organized"]),
            county=(str(d["county"]) if d.get("county") not in (None, "") else None),
            donations=donations,
        )
    except SchemaError as e:
        raise SchemaError(f"{where}: {e}") from e
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{where}: {e}") from e


def load_campaigns(path: str | Path, format: str = "json-lines") -> list[CampaignRecord]:
    """Load campaign records from JSON-lines or CSV.

    CSV rows hold the flat fields; donations are read from a companion file
    ``<stem>_donations.csv`` with columns ``id,timestamp,amount`` when it
    exists. Malformed rows are reported with their line numbers; duplicate
    ids are a hard error.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"campaign file not found: {path}")
    records: list[CampaignRecord] = []
    if format == "json-lines":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    d = json.loads(line)
                except json.JSONDecodeError as e:
                    raise SchemaError(f"{path}:{lineno}: invalid JSON ({e})") from e
                records.append(_record_from_dict(d, f"{path}:{lineno}"))
    elif format == "csv":
        donations_by_id: dict[str, list[tuple[str, float]]] = {}
        companion = path.with_name(path.stem + "_donations.csv")
        if companion.exists():
            with companion.open(encoding="utf-8", newline="") as fh:
                for lineno, row in enumerate(csv.DictReader(fh), start=2):
                    amount = float(row["amount"])
                    donations_by_id.setdefault(str(row["id"]), []).append(
                        (str(row["timestamp"]), amount)
                    )
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path}: missing CSV header row")
            for lineno, row in enumerate(reader, start=2):
                d = dict(row)
                d["donations"] = donations_by_id.get(str(row.get("id", "")), [])
                for flag in ("organizer_male", "has_beneficiary", "gofundme_organized"):
                    d[flag] = str(d.get(flag, "")).strip().lower() in ("1", "true", "yes")
                records.append(_record_from_dict(d, f"{path}:{lineno}"))
    else:
        raise SchemaError(f"unknown corpus format {format!r}")

    seen: dict[str, int] = {}
    for i, r in enumerate(records):
        if r.id in seen:
            raise SchemaError(f"duplicate campaign id {r.id!r} (records {seen[r.id]} and {i})")
        seen[r.id] = i
    return records


def save_campaigns(records: list[CampaignRecord], path: str | Path) -> None:
    """Write records in the canonical JSON-lines format (round-trip safe)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json_dict(), sort_keys=True) + "\n")


def filter_blank(records: list[CampaignRecord]) -> tuple[list[CampaignRecord], int]:
    """Drop campaigns lacking a description, a location, or a posting date.

    Returns (kept, removed_count).
    """
    kept = [
        r for r in records
        if r.description.strip() and r.city.strip() and r.state.strip() and r.created_date
    ]
    return kept, len(records) - len(kept)


def verdict_cache_key(prompt: str, model_id: str) -> str:
    return hashlib.sha256(f"{model_id}\x00{prompt}".encode("utf-8")).hexdigest()


def validate_small_business(record: CampaignRecord, llm_client) -> ValidationVerdict:
    """Classify a campaign as small-business (or owner-supporting) via the LLM.

    The reply must be JSON with ``business``/``business_explanation`` and,
    when business is false, ``owner_support``/``owner_support_explanation``.
    An unparseable reply is retried once by the client layer.
    """
    from .llm.client import render_prompt

    prompt = render_prompt("validate_business", text=record.description)
    reply = llm_client.complete_json(prompt)
    if "business" not in reply:
        raise SchemaError(f"campaign {record.id}: validation reply missing field 'business'")
    business = bool(reply["business"])
    if business:
        return ValidationVerdict(
            business=True,
            business_explanation=str(reply.get("business_explanation", "")),
        )
    if "owner_support" not in reply:
        raise SchemaError(f"campaign {record.id}: validation reply missing field 'owner_support'")
    return ValidationVerdict(
        business=False,
        business_explanation=str(reply.get("business_explanation", "")),
        owner_support=bool(reply["owner_support"]),
        owner_support_explanation=str(reply.get("owner_support_explanation", "")),
    )


def split_by_date(
    records: list[CampaignRecord], spec: SplitSpec
) -> tuple[list[CampaignRecord], list[CampaignRecord], list[CampaignRecord]]:
    """Partition records by posting date: train / validation / test.

    A record lands in train iff created_date <= train_end, in validation iff
    train_end < created_date <= val_end, otherwise in test. Records dated
    outside [window_start, window_end] (or undated) are an error.
    """
    train, val, test = [], [], []
    for r in records:
        if r.created_date is None:
            raise SchemaError(f"campaign {r.id}: missing created_date")
        if not (spec.window_start <= r.created_date <= spec.window_end):
            raise SchemaError(
                f"campaign {r.id}: created_date {r.created_date} outside window "
                f"[{spec.window_start}, {spec.window_end}]"
            )
        if r.created_date <= spec.train_end:
            train.append(r)
        elif r.created_date <= spec.val_end:
            val.append(r)
        else:
            test.append(r)
    return train, val, test
