"""Deterministic synthetic data: mini corpus, context tables, planted signals.

Everything here is a pure function of its seed so that pipeline reruns are
byte-identical. The mini corpus plants its funding signal in content that
the mock LLM provider's keyword rules pick up (gratitude, urgency, matching
grant, employees, the #smallbusiness tag), which is what makes the ablation
contrast between feature groups observable at desk scale.
"""

from __future__ import annotations

import csv
import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .context import ACS_FEATURES
from .corpus import CampaignRecord, SplitSpec

WINDOW_START = date(2020, 1, 22)
TRAIN_END = date(2020, 3, 31)
VAL_END = date(2020, 4, 30)
WINDOW_END = date(2020, 12, 31)

DEFAULT_SPLIT = SplitSpec(
    window_start=WINDOW_START, train_end=TRAIN_END, val_end=VAL_END, window_end=WINDOW_END,
)

CITIES = (
    ("Austin", "TX"), ("Portland", "OR"), ("Columbus", "OH"), ("Savannah", "GA"),
    ("Fresno", "CA"), ("Boulder", "CO"), ("Madison", "WI"), ("Tacoma", "WA"),
)
UNKNOWN_CITY = ("Smallville", "KS")

BUSINESS_TYPES = (
    "bakery", "coffee shop", "barber shop", "yoga studio", "bookstore",
    "flower shop", "diner", "brewery", "print shop", "music school",
)

# Sentences whose keywords trip the mock provider's flag rules.
GRATITUDE_SENT = "Thank you so much for your kindness and generous support."
URGENCY_SENT = "Our need is urgent because the bills are due right now."
MATCH_SENT = (
    "If we raise $500, GoFundMe's Small Business Relief Initiative will match "
    "$500 for our business."
)
EMPLOYEES_SENT = "The funds will help our employees and keep our staff paid."
RENT_SENT = "Part of the money covers the monthly rent for our space."
LONGHIST_SENT = "We have proudly served this neighborhood for 12 years."
NEWBIZ_SENT = "We are a newly opened business still finding our footing."
SOCIAL_BETTER_SENT = "Our service is better than any other place in town."
SELF_WORSE_SENT = "Sales are worse than before the closures began."
GIFT_SENT = "Every donor will receive a small gift card from our counter."

FILLER_SENTENCES = (
    "Our regulars know every corner of the room and every name behind it.",
    "The morning light comes through the front windows while we set up.",
    "Each order is prepared with the same care we brought on day one.",
    "Neighbors stop by after school and on weekends to see what is new.",
    "We source from local growers whenever the season allows it.",
    "The walls carry photographs of the people who built this place.",
    "Our small crew shares the opening and closing shifts through the week.",
    "The recipes came from family notebooks and years of small changes.",
    "People tell us the space feels calm even on the busiest days.",
    "We keep prices fair so everyone in the area can take part.",
    "The corner table has hosted study groups, first dates, and book clubs.",
    "Weekends bring live acoustic sets from musicians who live nearby.",
    "We repaint the front door every spring in the same deep green.",
    "A chalkboard by the register lists what is fresh each morning.",
    "Loyal customers helped us carry tables inside before the storm.",
    "The community board by the door fills up with flyers every week.",
)


def _acs_row(rng: np.random.Generator) -> list[float]:
    values = []
    for name in ACS_FEATURES:
        if name.startswith("pct_"):
            values.append(round(float(rng.uniform(2, 80)), 2))
        elif name in ("persons_per_household", "mean_travel_time_to_work"):
            values.append(round(float(rng.uniform(1.8, 35)), 2))
        elif name == "owner_occupied_rate":
            values.append(round(float(rng.uniform(30, 75)), 2))
        elif name.startswith("median_") or name == "per_capita_income":
            values.append(round(float(rng.uniform(900, 350000)), 0))
        else:
            values.append(round(float(rng.uniform(100, 900000)), 0))
    return values


def write_acs_csv(path: str | Path, seed: int = 7) -> None:
    rng = np.random.default_rng(seed)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["city", "state", *ACS_FEATURES])
        for city, state in CITIES:
            writer.writerow([city, state, *_acs_row(rng)])


def write_covid_csv(path: str | Path, seed: int = 11) -> None:
    """Daily new-case series per state plus a national series that sums them.

    Coverage starts 7 days before the observation window so the shock window
    of a first-day campaign is complete.
    """
    rng = np.random.default_rng(seed)
    states = sorted({s for _, s in CITIES} | {UNKNOWN_CITY[1]})
    series_start = WINDOW_START - timedelta(days=7)
    n_days = (WINDOW_END - series_start).days + 1
    t = np.arange(n_days)
    series = {}
    for state in states:
        scale = float(rng.uniform(40, 400))
        wave = scale * (1.2 + np.sin(t / 30.0 + float(rng.uniform(0, 6))))
        noise = rng.normal(0, scale * 0.1, n_days)
        series[state] = np.maximum(0, np.round(wave + t * scale / 200.0 + noise)).astype(int)
    national = sum(series.values())
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "date", "new_cases"])
        for state in states:
            for i in range(n_days):
                writer.writerow([state, (series_start + timedelta(days=int(i))).isoformat(),
                                 int(series[state][i])])
        for i in range(n_days):
            writer.writerow(["US", (series_start + timedelta(days=int(i))).isoformat(),
                             int(national[i])])


def _sigmoid(z: float) -> float:
    return 1.0 / (1.0 + np.exp(-z))


def _draw_created_date(rng: np.random.Generator) -> date:
    bucket = rng.choice(3, p=(0.55, 0.2, 0.25))
    if bucket == 0:
        lo, hi = WINDOW_START, TRAIN_END
    elif bucket == 1:
        lo, hi = TRAIN_END + timedelta(days=1), VAL_END
    else:
        lo, hi = VAL_END + timedelta(days=1), WINDOW_END
    return lo + timedelta(days=int(rng.integers(0, (hi - lo).days + 1)))


def make_minicorpus(n: int = 200, seed: int = 20200122) -> list[CampaignRecord]:
    """Synthetic campaigns with a funding signal planted in flag-trigger content."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        biz = BUSINESS_TYPES[int(rng.integers(len(BUSINESS_TYPES)))]
        if rng.random() < 0.05:
            city, state = UNKNOWN_CITY
        else:
            city, state = CITIES[int(rng.integers(len(CITIES)))]
        created = _draw_created_date(rng)
        goal = float(np.round(np.exp(rng.normal(9.2, 0.6)), -1))

        gratitude = rng.random() < 0.30
        urgency = rng.random() < 0.30
        match = rng.random() < 0.15
        employees = rng.random() < 0.50
        tag = rng.random() < 0.50
        rent = rng.random() < 0.50
        longhist = rng.random() < 0.40
        newbiz = (not longhist) and rng.random() < 0.20
        social_better = rng.random() < 0.20
        self_worse = rng.random() < 0.30
        gift = rng.random() < 0.15

        sentences = [
            f"We run a small {biz} in {city} and we are raising funds to stay open.",
            f"The {biz} has been part of daily life on our street in {city}.",
        ]
        if longhist:
            sentences.append(LONGHIST_SENT)
        if newbiz:
            sentences.append(NEWBIZ_SENT)
        if employees:
            sentences.append(EMPLOYEES_SENT)
        if rent:
            sentences.append(RENT_SENT)
        if social_better:
            sentences.append(SOCIAL_BETTER_SENT)
        if self_worse:
            sentences.append(SELF_WORSE_SENT)
        if gift:
            sentences.append(GIFT_SENT)
        if urgency:
            sentences.append(URGENCY_SENT)
        if match:
            sentences.append(MATCH_SENT)
        if gratitude:
            sentences.append(GRATITUDE_SENT)

        long_form = rng.random() < 0.70
        target_words = int(rng.integers(200, 320)) if long_form else int(rng.integers(90, 150))
        word_count = sum(len(s.split()) for s in sentences)
        fillers = rng.permutation(len(FILLER_SENTENCES))
        fi = 0
        while word_count < target_words:
            filler = FILLER_SENTENCES[int(fillers[fi % len(fillers)])]
            sentences.insert(2 + (fi % max(1, len(sentences) - 3)), filler)
            word_count += len(filler.split())
            fi += 1
        description = " ".join(sentences)
        if tag:
            description += " #smallbusiness"

        strategy_score = (
            1.0 * gratitude + 0.9 * urgency + 0.95 * match
            + 0.8 * tag + 0.7 * employees - 0.02 * (goal / 25000.0)
        )
        funded = rng.random() < _sigmoid(10.0 * (strategy_score - 1.2))
        donations = []
        if funded:
            for _ in range(1 + int(rng.poisson(2))):
                day = created + timedelta(days=int(rng.integers(1, 30)))
                amount = float(np.round(np.exp(rng.normal(3.6, 0.8)), 2))
                donations.append((day.isoformat(), max(amount, 1.0)))

        records.append(CampaignRecord(
            id=f"c{i + 1:04d}",
            title=f"Support our {biz} in {city}",
            description=description,
            created_date=created,
            city=city,
            state=state,
            goal_amount=goal,
            organizer_male=bool(rng.random() < 0.55),
            has_beneficiary=bool(rng.random() < 0.3),
            gofundme_organized=bool(rng.random() < 0.1),
            county=None,
            donations=donations,
        ))
    return records


def write_minicorpus(directory: str | Path, n: int = 200, seed: int = 20200122) -> dict[str, Path]:
    """Write corpus.jsonl, acs.csv, and covid.csv under ``directory``."""
    from .corpus import save_campaigns

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": directory / "corpus.jsonl",
        "acs": directory / "acs.csv",
        "covid": directory / "covid.csv",
    }
    save_campaigns(make_minicorpus(n=n, seed=seed), paths["corpus"])
    write_acs_csv(paths["acs"], seed=seed + 1)
    write_covid_csv(paths["covid"], seed=seed + 2)
    return paths


PLANTED_WEIGHT = 2.4  # five equal weights => latent std ~5.37 => Bayes accuracy ~0.90


def make_planted_classification(
    n: int = 2000, n_features: int = 20, n_informative: int = 5, seed: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Numeric planted-signal task: additive log-odds on the first k features.

    Returns (X, y, informative_indices); the Bayes error is known from the
    construction (accuracy ~= 0.90 at the default weight).
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, size=(n, n_features))
    informative = np.arange(n_informative)
    logits = PLANTED_WEIGHT * X[:, informative].sum(axis=1)
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-logits))).astype(np.int64)
    return X, y, informative


def generate_choice_records(
    path: str | Path,
    n_pairs: int = 1000,
    seed: int = 0,
    p_aug_vs_orig: float = 0.83,
    p_aug_vs_ext: float = 0.82,
    p_ext_vs_orig: float = 0.61,
    attention_fail_rate: float = 0.05,
) -> None:
    """Synthetic online-experiment choice records (JSON lines).

    Each participant contributes two pairs, mirroring the survey flow; the
    three comparison types appear with equal probability and the stated true
    choice shares.
    """
    rng = np.random.default_rng(seed)
    comparisons = (
        ("augmented_vs_original", "augmented", "original", p_aug_vs_orig),
        ("augmented_vs_extended", "augmented", "extended", p_aug_vs_ext),
        ("extended_vs_original", "extended", "original", p_ext_vs_orig),
    )
    with Path(path).open("w", encoding="utf-8") as fh:
        for pair_idx in range(n_pairs):
            participant = f"p{pair_idx // 2 + 1:05d}"
            comp, focal, other, p_true = comparisons[int(rng.integers(3))]
            own = focal if rng.random() < p_true else other
            public = focal if rng.random() < p_true else other
            first = focal if rng.random() < 0.5 else other
            record = {
                "participant_id": participant,
                "pair_id": f"pair{pair_idx + 1:05d}",
                "campaign_id": f"c{int(rng.integers(1, 17)):04d}",
                "comparison": comp,
                "first_shown": first,
                "own_choice": own,
                "public_choice": public,
                "passed_general_attention": bool(rng.random() > attention_fail_rate),
                "passed_campaign_attention": bool(rng.random() > attention_fail_rate),
                "age": int(min(max(rng.normal(42, 13), 18.0), 80.0)),
                "gender": int(rng.random() < 0.44),
                "donated_last_year": int(rng.integers(0, 3)),
                "donated_amount": int(rng.integers(0, 3)),
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
