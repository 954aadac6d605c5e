from datetime import date

import numpy as np
import pytest

from fundlift.context import (
    ACS_FEATURES,
    CovidSeries,
    FeatureMatrix,
    FeatureResources,
    assemble_feature_matrix,
    covid_shock,
    feature_schema,
    join_acs,
    load_acs,
    load_covid,
)
from fundlift.corpus import CampaignRecord
from fundlift.errors import SchemaError
from fundlift.synth import write_acs_csv, write_covid_csv


def make_record(**overrides):
    base = dict(
        id="c1", title="t", description="We run a small bakery and need rent help.",
        created_date=date(2020, 3, 1), city="Austin", state="TX",
        goal_amount=5000.0, organizer_male=False, has_beneficiary=False,
        gofundme_organized=False,
    )
    base.update(overrides)
    return CampaignRecord(**base)


def constant_series(states, start, end, value_by_state):
    by_state = {}
    day = start
    while day <= end:
        for s in states:
            by_state.setdefault(s, {})[day] = value_by_state[s]
        day = date.fromordinal(day.toordinal() + 1)
    return CovidSeries(by_state=by_state)


class TestCovidShock:
    def test_hand_sums(self):
        series = constant_series(
            ["TX", "US"], date(2020, 2, 1), date(2020, 3, 31), {"TX": 10, "US": 100}
        )
        cases, share = covid_shock(make_record(), series)
        assert cases == 70
        assert share == pytest.approx(0.1, abs=1e-12)

    def test_zero_everywhere(self):
        series = constant_series(
            ["TX", "US"], date(2020, 2, 1), date(2020, 3, 31), {"TX": 0, "US": 0}
        )
        assert covid_shock(make_record(), series) == (0, 0.0)

    def test_missing_day_errors(self):
        series = constant_series(
            ["TX", "US"], date(2020, 2, 1), date(2020, 3, 31), {"TX": 5, "US": 50}
        )
        del series.by_state["TX"][date(2020, 2, 26)]
        with pytest.raises(SchemaError, match="coverage"):
            covid_shock(make_record(), series)

    def test_window_is_strictly_before_creation(self):
        series = constant_series(
            ["TX", "US"], date(2020, 2, 23), date(2020, 2, 29), {"TX": 1, "US": 2}
        )
        cases, share = covid_shock(make_record(), series)  # created 2020-03-01
        assert cases == 7 and share == 0.5

    def test_doubling_preserves_share(self):
        series = constant_series(
            ["TX", "US"], date(2020, 2, 1), date(2020, 3, 31), {"TX": 7, "US": 70}
        )
        doubled = constant_series(
            ["TX", "US"], date(2020, 2, 1), date(2020, 3, 31), {"TX": 14, "US": 140}
        )
        c1, s1 = covid_shock(make_record(), series)
        c2, s2 = covid_shock(make_record(), doubled)
        assert c2 == 2 * c1 and s1 == s2


class TestAcs:
    def test_join_and_case_folding(self, tmp_path):
        p = tmp_path / "acs.csv"
        write_acs_csv(p, seed=1)
        acs = load_acs(p)
        exact = join_acs(make_record(city="Austin"), acs)
        folded = join_acs(make_record(city="austin"), acs)
        assert exact == folded
        assert len(exact) == 46
        assert all(np.isfinite(v) for v in exact.values())

    def test_unknown_city_yields_missing(self, tmp_path):
        p = tmp_path / "acs.csv"
        write_acs_csv(p, seed=1)
        acs = load_acs(p)
        values = join_acs(make_record(city="Nowhere"), acs)
        assert len(values) == 46
        assert all(np.isnan(v) for v in values.values())

    def test_header_mismatch_rejected(self, tmp_path):
        p = tmp_path / "acs.csv"
        p.write_text("city,state,whatever\nAustin,TX,1\n")
        with pytest.raises(SchemaError, match="header"):
            load_acs(p)

    def test_percentage_bounds_enforced(self, tmp_path):
        p = tmp_path / "acs.csv"
        header = ",".join(["city", "state", *ACS_FEATURES])
        row = ["Austin", "TX"] + ["10"] * len(ACS_FEATURES)
        row[2 + ACS_FEATURES.index("pct_female")] = "150"
        p.write_text(header + "\n" + ",".join(row) + "\n")
        with pytest.raises(SchemaError, match=r"\[0, 100\]"):
            load_acs(p)


class TestCovidLoader:
    def test_gap_detected(self, tmp_path):
        p = tmp_path / "covid.csv"
        p.write_text(
            "state,date,new_cases\nTX,2020-01-01,5\nTX,2020-01-03,5\n"
        )
        with pytest.raises(SchemaError, match="gaps"):
            load_covid(p)

    def test_loader_round_trip(self, tmp_path):
        p = tmp_path / "covid.csv"
        write_covid_csv(p, seed=3)
        series = load_covid(p)
        assert "US" in series.by_state
        lo, hi = series.coverage("TX")
        assert lo < hi


@pytest.fixture()
def resources(tmp_path, text_resources):
    write_acs_csv(tmp_path / "acs.csv", seed=1)
    write_covid_csv(tmp_path / "covid.csv", seed=2)
    return FeatureResources(
        text=text_resources,
        acs=load_acs(tmp_path / "acs.csv"),
        covid=load_covid(tmp_path / "covid.csv"),
    )


class TestAssembly:
    def test_shape_and_group_cardinalities(self, resources, mock_client):
        records = [make_record(id=f"c{i}") for i in range(3)]
        matrix = assemble_feature_matrix(records, resources, mock_client)
        assert matrix.values.shape == (3, 168)
        assert matrix.group_counts() == {
            "textual": 116, "configuration": 4, "pandemic": 2, "demographics": 46,
        }

    def test_determinism_under_mock(self, resources, mock_client_nocache):
        records = [make_record(id=f"c{i}", description=f"Our shop number {i} needs help.")
                   for i in range(4)]
        a = assemble_feature_matrix(records, resources, mock_client_nocache)
        b = assemble_feature_matrix(records, resources, mock_client_nocache)
        assert np.array_equal(a.values, b.values)
        assert a.names == b.names

    def test_unknown_city_gets_missing_demographics(self, resources, mock_client):
        matrix = assemble_feature_matrix(
            [make_record(city="Nowhere")], resources, mock_client
        )
        demo, names = matrix.select_groups({"demographics"})
        assert np.isnan(demo).all()
        textual, _ = matrix.select_groups({"textual"})
        assert np.isfinite(textual).all()

    def test_flags_encoded_binary(self, resources, mock_client):
        record = make_record(
            description="Thank you for helping our bakery pay rent urgently. #smallbusiness",
            organizer_male=True,
        )
        matrix = assemble_feature_matrix([record], resources, mock_client)
        assert matrix.column("gpt_gratitude_expressed")[0] == 1.0
        assert matrix.column("gpt_urgency_explained")[0] == 1.0
        assert matrix.column("organizer_male")[0] == 1.0
        assert matrix.column("gofundme_organized")[0] == 0.0

    def test_row_error_carries_id(self, resources, mock_client):
        bad = make_record(id="empty-desc")
        bad.description = ""
        with pytest.raises(SchemaError, match="empty-desc"):
            assemble_feature_matrix([bad], resources, mock_client)

    def test_csv_round_trip(self, resources, mock_client, tmp_path):
        records = [make_record(id=f"c{i}") for i in range(2)]
        matrix = assemble_feature_matrix(records, resources, mock_client)
        path = tmp_path / "m.csv"
        matrix.save_csv(path)
        loaded = FeatureMatrix.load_csv(path)
        assert loaded.names == matrix.names
        assert loaded.groups == matrix.groups
        assert np.array_equal(
            np.nan_to_num(loaded.values, nan=-1), np.nan_to_num(matrix.values, nan=-1)
        )

    def test_schema_order_is_frozen(self, text_resources):
        names, groups = feature_schema(text_resources)
        assert len(names) == 168
        assert names[0] == "word_count"
        assert names[105].startswith("gpt_")
        assert names[116] == "goal_amount"
        assert names[120] == "covid_cases_7d"
        assert names[122].startswith("acs_")
