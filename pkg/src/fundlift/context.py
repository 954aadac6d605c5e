"""Demographic and pandemic context joins plus full feature-matrix assembly.

The assembled matrix has 168 named, group-tagged columns:
105 lexicon + 11 LLM flags (group "textual"), 4 campaign configuration
fields, 2 pandemic-shock statistics, and 46 local demographics.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .corpus import CampaignRecord
from .errors import SchemaError
from .llm.client import LlmClient
from .llm.features import FLAG_ORDER, extract_gpt_features_many
from .textfeat.features import TextResources, extract_lexicon_features

log = logging.getLogger(__name__)

NATIONAL_CODE = "US"

ACS_FEATURES = (
    # population / gender
    "population_per_sq_mile",
    "pct_female",
    # ages
    "pct_under_5",
    "pct_under_18",
    "pct_over_65",
    # race
    "pct_two_or_more_races",
    "pct_white_not_hispanic",
    "pct_asian",
    "pct_hispanic_or_latino",
    "pct_white",
    "pct_black",
    "pct_pacific_islander",
    "pct_american_indian",
    # education
    "pct_bachelor_or_higher",
    # household
    "housing_units",
    "persons_per_household",
    "owner_occupied_rate",
    "households",
    "pct_same_house_1yr",
    "pct_households_with_computer",
    "pct_households_with_broadband",
    # income
    "median_gross_rent",
    "per_capita_income",
    "median_household_income",
    "pct_in_poverty",
    "median_home_value",
    "monthly_owner_costs_with_mortgage",
    "monthly_owner_costs_without_mortgage",
    # business
    "total_firms",
    "men_owned_firms",
    "nonminority_owned_firms",
    "total_retail_sales",
    "retail_sales_per_capita",
    "health_care_receipts",
    "transportation_receipts",
    # employment
    "employer_establishments",
    "total_annual_payroll",
    "pct_change_employment",
    "nonemployer_establishments",
    "mean_travel_time_to_work",
    "pct_civilian_labor_force",
    "pct_female_labor_force",
    # others
    "veterans",
    "pct_foreign_born",
    "pct_other_language_at_home",
    "pct_under_65_disability",
)

CONFIG_FEATURES = ("goal_amount", "organizer_male", "has_beneficiary", "gofundme_organized")
PANDEMIC_FEATURES = ("covid_cases_7d", "covid_share_of_us")

GROUP_TEXTUAL = "textual"
GROUP_CONFIG = "configuration"
GROUP_PANDEMIC = "pandemic"
GROUP_DEMOGRAPHICS = "demographics"


@dataclass
class AcsTable:
    """Demographic rows keyed by case-folded (city, state)."""

    rows: dict[tuple[str, str], np.ndarray]

    @staticmethod
    def key(city: str, state: str) -> tuple[str, str]:
        return city.strip().casefold(), state.strip().casefold()

    def lookup(self, city: str, state: str) -> np.ndarray | None:
        return self.rows.get(self.key(city, state))


def load_acs(path: str | Path) -> AcsTable:
    """Load the ACS CSV; header must be city,state plus the 46 canonical names."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["city", "state", *ACS_FEATURES]
        if reader.fieldnames != expected:
            raise SchemaError(
                f"{path}: ACS header mismatch; expected {len(expected)} canonical columns"
            )
        rows: dict[tuple[str, str], np.ndarray] = {}
        for lineno, row in enumerate(reader, start=2):
            values = np.empty(len(ACS_FEATURES))
            for j, name in enumerate(ACS_FEATURES):
                cell = row[name].strip()
                values[j] = float(cell) if cell else np.nan
                if not np.isnan(values[j]):
                    if name.startswith("pct_") and not 0 <= values[j] <= 100:
                        raise SchemaError(f"{path}:{lineno}: {name} outside [0, 100]")
                    if not name.startswith("pct_") and values[j] < 0:
                        raise SchemaError(f"{path}:{lineno}: {name} is negative")
            rows[AcsTable.key(row["city"], row["state"])] = values
    return AcsTable(rows=rows)


@dataclass
class CovidSeries:
    """Per-state daily new-case counts plus the national series under "US"."""

    by_state: dict[str, dict[date, int]]

    def coverage(self, state: str) -> tuple[date, date] | None:
        series = self.by_state.get(state)
        if not series:
            return None
        return min(series), max(series)


def load_covid(path: str | Path) -> CovidSeries:
    """Load the COVID CSV (state,date,new_cases); dates must be gap-free."""
    path = Path(path)
    by_state: dict[str, dict[date, int]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["state", "date", "new_cases"]:
            raise SchemaError(f"{path}: expected header state,date,new_cases")
        for lineno, row in enumerate(reader, start=2):
            day = date.fromisoformat(row["date"])
            cases = int(row["new_cases"])
            if cases < 0:
                raise SchemaError(f"{path}:{lineno}: negative case count")
            by_state.setdefault(row["state"].strip().upper(), {})[day] = cases
    for state, series in by_state.items():
        lo, hi = min(series), max(series)
        if (hi - lo).days + 1 != len(series):
            raise SchemaError(f"COVID series for {state} has gaps between {lo} and {hi}")
    return CovidSeries(by_state=by_state)


def covid_shock(record: CampaignRecord, series: CovidSeries) -> tuple[int, float]:
    """New state cases over the 7 days strictly before posting, and US share."""
    if record.created_date is None:
        raise SchemaError(f"campaign {record.id}: missing created_date")
    days = [record.created_date - timedelta(days=d) for d in range(7, 0, -1)]
    state = record.state.strip().upper()
    state_series = series.by_state.get(state)
    national = series.by_state.get(NATIONAL_CODE)
    if state_series is None:
        raise SchemaError(f"no COVID series for state {state!r}")
    if national is None:
        raise SchemaError(f"no national COVID series under {NATIONAL_CODE!r}")
    missing = [d for d in days if d not in state_series or d not in national]
    if missing:
        raise SchemaError(
            f"campaign {record.id}: COVID coverage missing for {missing[0].isoformat()}"
        )
    cases = sum(state_series[d] for d in days)
    us_total = sum(national[d] for d in days)
    share = cases / us_total if us_total > 0 else 0.0
    return cases, share


def join_acs(record: CampaignRecord, acs: AcsTable) -> dict[str, float]:
    """46 demographic features for the record's city; missing markers on no match."""
    row = acs.lookup(record.city, record.state)
    if row is None:
        log.info("no ACS row for (%s, %s); emitting missing markers", record.city, record.state)
        return {name: float("nan") for name in ACS_FEATURES}
    return {name: float(v) for name, v in zip(ACS_FEATURES, row)}


@dataclass
class FeatureResources:
    """Everything feature assembly needs besides the LLM client."""

    text: TextResources
    acs: AcsTable
    covid: CovidSeries


@dataclass
class FeatureMatrix:
    """Row ids, 168 ordered column names with group tags, and the value grid."""

    ids: tuple[str, ...]
    names: tuple[str, ...]
    groups: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.names) != len(self.groups):
            raise SchemaError("names and groups length mismatch")
        if self.values.shape != (len(self.ids), len(self.names)):
            raise SchemaError("values shape does not match ids x names")

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def column_index(self, name: str) -> int:
        return self.names.index(name)

    def group_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.groups:
            out[g] = out.get(g, 0) + 1
        return out

    def groups_by_name(self) -> dict[str, str]:
        return dict(zip(self.names, self.groups))

    def select_groups(self, groups: set[str]) -> tuple[np.ndarray, tuple[str, ...]]:
        idx = [j for j, g in enumerate(self.groups) if g in groups]
        return self.values[:, idx], tuple(self.names[j] for j in idx)

    def row_by_id(self, campaign_id: str) -> np.ndarray:
        return self.values[self.ids.index(campaign_id)]

    def save_csv(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", *self.names])
            writer.writerow(["#group", *self.groups])
            for i, row_id in enumerate(self.ids):
                writer.writerow([row_id, *(repr(float(v)) for v in self.values[i])])

    @classmethod
    def load_csv(cls, path: str | Path) -> "FeatureMatrix":
        path = Path(path)
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            group_row = next(reader)
            if header[0] != "id" or group_row[0] != "#group":
                raise SchemaError(f"{path}: not a feature-matrix CSV")
            names = tuple(header[1:])
            groups = tuple(group_row[1:])
            ids = []
            rows = []
            for row in reader:
                ids.append(row[0])
                rows.append([float(v) for v in row[1:]])
        values = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
        return cls(ids=tuple(ids), names=names, groups=groups, values=values)


def feature_schema(text_resources: TextResources) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Canonical (names, groups) for the assembled matrix."""
    lexicon = text_resources.feature_names()
    gpt = tuple(f"gpt_{flag}" for flag in FLAG_ORDER)
    names = lexicon + gpt + CONFIG_FEATURES + PANDEMIC_FEATURES \
        + tuple(f"acs_{n}" for n in ACS_FEATURES)
    groups = (
        (GROUP_TEXTUAL,) * (len(lexicon) + len(gpt))
        + (GROUP_CONFIG,) * len(CONFIG_FEATURES)
        + (GROUP_PANDEMIC,) * len(PANDEMIC_FEATURES)
        + (GROUP_DEMOGRAPHICS,) * len(ACS_FEATURES)
    )
    return names, groups


def assemble_feature_matrix(
    records: list[CampaignRecord],
    resources: FeatureResources,
    llm_client: LlmClient,
    allow_missing_context: bool = False,
) -> FeatureMatrix:
    """One 168-column row per record, in input order.

    Boolean flags are encoded 0/1; demographic misses become NaN markers.
    With ``allow_missing_context`` the pandemic columns also degrade to NaN
    when series coverage is absent (the serving path); otherwise coverage
    holes are errors reported with their row ids.
    """
    names, groups = feature_schema(resources.text)
    values = np.empty((len(records), len(names)), dtype=np.float64)
    errors: list[str] = []

    gpt_sets = extract_gpt_features_many([r.description for r in records], llm_client)

    for i, (record, gpt) in enumerate(zip(records, gpt_sets)):
        try:
            lexicon = extract_lexicon_features(record.description, resources.text)
            row = [
                *lexicon.values,
                *(1.0 if flag else 0.0 for flag in gpt.flag_values()),
                float(record.goal_amount),
                1.0 if record.organizer_male else 0.0,
                1.0 if record.has_beneficiary else 0.0,
                1.0 if record.gofundme_organized else 0.0,
            ]
            try:
                cases, share = covid_shock(record, resources.covid)
                row.extend([float(cases), share])
            except SchemaError:
                if not allow_missing_context:
                    raise
                row.extend([np.nan, np.nan])
            acs_values = join_acs(record, resources.acs)
            row.extend(acs_values[n] for n in ACS_FEATURES)
            values[i] = row
        except (SchemaError, ValueError) as e:
            errors.append(f"row {record.id}: {e}")

    if errors:
        raise SchemaError(
            f"feature assembly failed for {len(errors)} rows: " + "; ".join(errors[:10])
        )
    return FeatureMatrix(
        ids=tuple(r.id for r in records), names=names, groups=groups, values=values
    )
