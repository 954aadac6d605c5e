"""Word-list resources: category dictionary, valence lexicons, flat lists.

File formats (all UTF-8, ``#`` comment lines ignored):

* category dictionary: ``[category]`` section headers followed by one pattern
  per line; a trailing ``*`` marks a stem that matches any token it prefixes.
* valence lexicon: first non-comment line ``%range<TAB>min<TAB>max``, then
  ``word<TAB>score`` lines; every score must fall inside the range.
* flat list (spam words, honorifics): one lowercase entry per line; entries
  may contain a space to form a bigram.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class CategoryDictionary:
    """Named category word lists with optional trailing-wildcard stems."""

    name: str
    categories: dict[str, list[str]]
    _exact: dict[str, list[str]] = field(init=False, repr=False)
    _stems: dict[str, list[str]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._exact = {}
        self._stems = {}
        for cat, patterns in self.categories.items():
            exact, stems = [], []
            for p in patterns:
                if not p:
                    raise ValueError(f"empty pattern in category {cat!r}")
                if "*" in p[:-1]:
                    raise ValueError(f"wildcard must be final in pattern {p!r}")
                (stems if p.endswith("*") else exact).append(p.rstrip("*"))
            self._exact[cat] = exact
            self._stems[cat] = stems

    def matches(self, category: str, token: str) -> bool:
        if token in self._exact_set(category):
            return True
        return any(token.startswith(s) for s in self._stems[category])

    def _exact_set(self, category: str) -> frozenset[str]:
        exact = self._exact[category]
        if not isinstance(exact, frozenset):
            exact = frozenset(exact)
            self._exact[category] = exact
        return exact

    def count(self, category: str, tokens) -> int:
        return sum(1 for t in tokens if self.matches(category, t))


@dataclass(frozen=True)
class ValenceLexicon:
    """Word -> real score map with a declared score range."""

    entries: dict[str, float]
    score_range: tuple[float, float]

    def __post_init__(self) -> None:
        lo, hi = self.score_range
        bad = {w: s for w, s in self.entries.items() if not lo <= s <= hi}
        if bad:
            raise ValueError(f"scores outside range {self.score_range}: {sorted(bad)[:5]}")

    @property
    def midpoint(self) -> float:
        lo, hi = self.score_range
        return (lo + hi) / 2.0


def _content_lines(path: Path) -> list[str]:
    lines = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


def load_category_dictionary(path: str | Path, name: str | None = None) -> CategoryDictionary:
    path = Path(path)
    categories: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in _content_lines(path):
        if line.startswith("[") and line.endswith("]"):
            cat = line[1:-1].strip()
            if not cat:
                raise ValueError(f"{path}: empty category header")
            current = categories.setdefault(cat, [])
        else:
            if current is None:
                raise ValueError(f"{path}: pattern {line!r} before any category header")
            current.append(line.lower())
    return CategoryDictionary(name=name or path.stem, categories=categories)


def load_valence_lexicon(path: str | Path) -> ValenceLexicon:
    path = Path(path)
    lines = _content_lines(path)
    if not lines or not lines[0].startswith("%range"):
        raise ValueError(f"{path}: missing %range header")
    _, lo, hi = lines[0].split("\t")
    entries: dict[str, float] = {}
    for line in lines[1:]:
        word, score = line.split("\t")
        entries[word.lower()] = float(score)
    return ValenceLexicon(entries=entries, score_range=(float(lo), float(hi)))


def load_word_list(path: str | Path) -> frozenset[str]:
    return frozenset(line.lower() for line in _content_lines(Path(path)))
