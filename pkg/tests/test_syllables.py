from pathlib import Path

import pytest

from fundlift.textfeat import count_syllables, total_syllables

FIXTURE = Path(__file__).parent / "data" / "syllable_fixture.tsv"


def load_fixture():
    pairs = []
    for line in FIXTURE.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, count = line.split("\t")
        pairs.append((word, int(count)))
    return pairs


def test_fixture_has_200_words():
    assert len(load_fixture()) == 200


@pytest.mark.parametrize("word,expected", load_fixture())
def test_dictionary_oracle(word, expected):
    assert count_syllables(word) == expected


def test_single_vowel_group():
    assert count_syllables("cat") == 1


def test_gratitude_three():
    assert count_syllables("gratitude") == 3


def test_donate_two():
    assert count_syllables("donate") == 2


def test_minimum_one():
    assert count_syllables("dr") == 1


def test_rejects_non_alphabetic():
    with pytest.raises(ValueError):
        count_syllables("3rd")
    with pytest.raises(ValueError):
        count_syllables("")
    with pytest.raises(ValueError):
        count_syllables("co-op")


def test_total_syllables_counts_non_alpha_as_one():
    assert total_syllables(["we", "raised", "500"]) == 1 + 1 + 1
