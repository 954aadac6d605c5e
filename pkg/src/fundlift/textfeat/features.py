"""Lexicon-based textual features (105 in the bundled canonical set).

The canonical vector is: two length statistics, two readability statistics,
two valence means, polarity, four emotion fractions, two binary text flags,
then one percentage per dictionary category in dictionary order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dictionaries import (
    CategoryDictionary,
    ValenceLexicon,
    load_category_dictionary,
    load_valence_lexicon,
    load_word_list,
)
from .syllables import total_syllables
from .tokenize import TokenizedText, tokenize

TEXT_GROUP = "textual-lexicon"

_NRC_NAMES = ("joy", "sadness", "positive", "negative")
_CASED_TOKEN_RE = re.compile(r"\w+(?:['’]\w+)*", re.UNICODE)


@dataclass(frozen=True)
class TextFeatureVector:
    """Named, ordered lexicon feature values, all tagged ``textual-lexicon``."""

    names: tuple[str, ...]
    values: np.ndarray
    group: str = TEXT_GROUP

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])


@dataclass
class TextResources:
    """Immutable bundle of every word-list resource the extractor needs."""

    dictionary: CategoryDictionary
    concreteness: ValenceLexicon
    dominance: ValenceLexicon
    nrc: dict[str, ValenceLexicon]
    polarity: ValenceLexicon
    spam_words: frozenset[str]
    honorifics: frozenset[str]

    def feature_names(self) -> tuple[str, ...]:
        base = (
            "word_count",
            "words_per_sentence",
            "syllables_per_word",
            "fk_grade",
            "concreteness_mean",
            "dominance_mean",
            "polarity",
            "nrc_joy",
            "nrc_sadness",
            "nrc_positive",
            "nrc_negative",
            "contains_spam",
            "mentions_person",
        )
        return base + tuple(f"pct_{c}" for c in self.dictionary.categories)


def default_resource_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "resources" / "lexicons"


def load_text_resources(directory: str | Path | None = None) -> TextResources:
    """Load the bundled resource files (or a drop-in replacement directory)."""
    d = Path(directory) if directory is not None else default_resource_dir()
    missing = [n for n in (
        "categories.dic", "concreteness.tsv", "dominance.tsv", "polarity.tsv",
        "nrc_joy.tsv", "nrc_sadness.tsv", "nrc_positive.tsv", "nrc_negative.tsv",
        "spam_words.txt", "honorifics.txt",
    ) if not (d / n).exists()]
    if missing:
        raise FileNotFoundError(f"missing text resources in {d}: {missing}")
    return TextResources(
        dictionary=load_category_dictionary(d / "categories.dic"),
        concreteness=load_valence_lexicon(d / "concreteness.tsv"),
        dominance=load_valence_lexicon(d / "dominance.tsv"),
        nrc={n: load_valence_lexicon(d / f"nrc_{n}.tsv") for n in _NRC_NAMES},
        polarity=load_valence_lexicon(d / "polarity.tsv"),
        spam_words=load_word_list(d / "spam_words.txt"),
        honorifics=load_word_list(d / "honorifics.txt"),
    )


def readability(tok: TokenizedText) -> tuple[int, float, float, float]:
    """Return (word_count, words_per_sentence, syllables_per_word, fk_grade).

    fk_grade = 0.39 * (words/sentences) + 11.8 * (syllables/words) - 15.59.
    """
    if tok.word_count == 0 or tok.sentence_count == 0:
        raise ValueError("readability requires at least one token and one sentence")
    words = tok.word_count
    wps = words / tok.sentence_count
    spw = total_syllables(tok.tokens) / words
    fk = 0.39 * wps + 11.8 * spw - 15.59
    return words, wps, spw, fk


def category_percentages(tok: TokenizedText, dictionary: CategoryDictionary) -> dict[str, float]:
    """Percentage of tokens matching each category (stem patterns by prefix)."""
    if tok.word_count == 0:
        raise ValueError("category_percentages requires a non-empty text")
    n = tok.word_count
    return {c: 100.0 * dictionary.count(c, tok.tokens) / n for c in dictionary.categories}


def lexicon_mean(tok: TokenizedText, lexicon: ValenceLexicon) -> float:
    """Mean score over in-lexicon tokens; score-range midpoint when none match."""
    scores = [lexicon.entries[t] for t in tok.tokens if t in lexicon.entries]
    if not scores:
        return lexicon.midpoint
    return float(sum(scores) / len(scores))


def emotion_and_polarity(
    tok: TokenizedText,
    nrc: dict[str, ValenceLexicon],
    polarity_lexicon: ValenceLexicon,
) -> tuple[float, float, float, float, float]:
    """NRC flag fractions (joy, sadness, positive, negative) and clipped polarity."""
    n = tok.word_count
    fractions = []
    for name in _NRC_NAMES:
        lex = nrc[name]
        hits = sum(1 for t in tok.tokens if lex.entries.get(t, 0.0) > 0.0)
        fractions.append(hits / n if n else 0.0)
    pol = lexicon_mean(tok, polarity_lexicon) if n else polarity_lexicon.midpoint
    pol = float(np.clip(pol, -1.0, 1.0))
    return (*fractions, pol)


def flags(
    tok: TokenizedText,
    spam_list: frozenset[str],
    honorifics: frozenset[str],
) -> tuple[bool, bool]:
    """(contains_spam, mentions_person) from documented heuristics.

    A person mention is a capitalized token (Xxxx) in non-sentence-initial
    position, or one that immediately follows an honorific. This is a
    deterministic stand-in for a named-entity model.
    """
    spam = any(t in spam_list for t in tok.tokens)
    if not spam:
        for a, b in zip(tok.tokens, tok.tokens[1:]):
            if f"{a} {b}" in spam_list:
                spam = True
                break

    cased = [m.group(0) for m in _CASED_TOKEN_RE.finditer(tok.raw)]
    initials = {start for start, _ in tok.sentences}
    person = False
    for i, c in enumerate(cased):
        if len(c) > 1 and c[0].isupper() and c[1:].islower():
            if i not in initials or (i > 0 and tok.tokens[i - 1] in honorifics):
                person = True
                break
    return spam, person


def extract_lexicon_features(text: str, resources: TextResources) -> TextFeatureVector:
    """Compute the full canonical lexicon feature vector for one description.

    Pure function of (text, resources); empty text raises via ``readability``.
    """
    tok = tokenize(text)
    words, wps, spw, fk = readability(tok)
    conc = lexicon_mean(tok, resources.concreteness)
    dom = lexicon_mean(tok, resources.dominance)
    joy, sad, pos, neg, pol = emotion_and_polarity(tok, resources.nrc, resources.polarity)
    spam, person = flags(tok, resources.spam_words, resources.honorifics)
    pct = category_percentages(tok, resources.dictionary)

    names = resources.feature_names()
    values = np.empty(len(names), dtype=np.float64)
    values[:13] = (
        float(words), wps, spw, fk, conc, dom, pol,
        joy, sad, pos, neg, float(spam), float(person),
    )
    values[13:] = [pct[c] for c in resources.dictionary.categories]
    return TextFeatureVector(names=names, values=values)


class LexiconFeatureExtractor:
    """Transformer-style wrapper around :func:`extract_lexicon_features`.

    Follows the fit/transform estimator convention so the extractor can sit
    in a pipeline next to the boosted-tree classifier; ``fit`` only loads
    resources (there is nothing to learn).
    """

    def __init__(self, resource_dir: str | None = None):
        self.resource_dir = resource_dir

    def get_params(self, deep: bool = True) -> dict:
        return {"resource_dir": self.resource_dir}

    def set_params(self, **params) -> "LexiconFeatureExtractor":
        for k, v in params.items():
            if not hasattr(self, k):
                raise ValueError(f"unknown parameter {k!r}")
            setattr(self, k, v)
        return self

    def fit(self, X=None, y=None) -> "LexiconFeatureExtractor":
        self.resources_ = load_text_resources(self.resource_dir)
        self.feature_names_ = self.resources_.feature_names()
        return self

    def transform(self, texts) -> np.ndarray:
        if not hasattr(self, "resources_"):
            self.fit()
        rows = [extract_lexicon_features(t, self.resources_).values for t in texts]
        return np.vstack(rows) if rows else np.empty((0, len(self.feature_names_)))

    def fit_transform(self, texts, y=None) -> np.ndarray:
        return self.fit().transform(texts)

    def get_feature_names_out(self) -> tuple[str, ...]:
        return self.feature_names_
