"""Heuristic syllable counter with a frozen rule list.

The rules below are the reference definition for every readability figure in
this package; they are validated against a 200-word dictionary-syllabified
fixture in the test suite and must not drift.

Rule list (applied in order, on the lowercased word):
 1. A vowel group is a maximal run of vowel characters. ``a e i o u`` are
    always vowels; ``y`` is a vowel only when the next character is not one
    of ``a e i o u`` (so "yes" has one group, "happy" two, "beyond" two).
 2. The raw count is the number of vowel groups.
 3. Hiatus splits add one syllable each, when the pair follows a consonant:
    ``ia`` unless that consonant is ``c g s t x`` ("media" 3, "special" 2),
    including after ``c s t x`` when a ``t`` follows ("appreciation");
    ``io`` unless the consonant is ``c g s t x`` or the next letter is
    ``n`` or ``r`` ("priority" 4, "nation" 2, "senior" 2);
    ``ua`` unless the consonant is ``g`` or ``q`` ("situation" 4,
    "language" 2).
 4. ``eful`` after a consonant drops one group ("grateful" 2,
    "carefully" 3, "gleeful" 2 unaffected).
 5. A final silent ``e`` drops one group: word ends in ``e`` but not in
    ``ee`` ("coffee") and not in ``le`` after a consonant ("little").
 6. A final ``ed`` drops one group unless the stem ends in ``t`` or ``d``
    ("baked" 1, "wanted" 2) or in consonant+``l`` ("doubled" 2).
 7. A final ``es`` drops one group unless it follows ``c g s x z``, a
    ``ch``/``sh`` digraph, or consonant+``l`` ("makes" 1, "prices" 2,
    "wishes" 2, "tables" 2).
 8. A final ``ely`` after a consonant drops one group ("lovely" 2,
    "freely" 2).
 9. A final ``ement`` after a consonant drops one group ("movement" 2,
    "agreement" 3).
10. The count never goes below 1.
"""

from __future__ import annotations

_HARD_VOWELS = frozenset("aeiou")
_VOWELS_Y = frozenset("aeiouy")


def _vowel_groups(word: str) -> int:
    groups = 0
    in_group = False
    n = len(word)
    for i, ch in enumerate(word):
        if ch in _HARD_VOWELS:
            vowel = True
        elif ch == "y":
            nxt = word[i + 1] if i + 1 < n else ""
            vowel = nxt not in _HARD_VOWELS
        else:
            vowel = False
        if vowel and not in_group:
            groups += 1
        in_group = vowel
    return groups


def _hiatus_splits(w: str) -> int:
    splits = 0
    n = len(w)
    for i in range(1, n - 1):
        prev = w[i - 1]
        if prev in _VOWELS_Y:
            continue
        pair = w[i : i + 2]
        nxt = w[i + 2] if i + 2 < n else ""
        if pair == "ia":
            if prev not in "cgstx" or (prev in "cstx" and nxt == "t"):
                splits += 1
        elif pair == "io":
            if prev not in "cgstx" and nxt not in ("n", "r"):
                splits += 1
        elif pair == "ua":
            if prev not in "gq":
                splits += 1
    return splits


def count_syllables(word: str) -> int:
    """Count syllables in a single alphabetic word.

    Raises ``ValueError`` for empty or non-alphabetic input.
    """
    if not word or not word.isalpha():
        raise ValueError(f"count_syllables expects an alphabetic word, got {word!r}")
    w = word.lower()
    count = _vowel_groups(w) + _hiatus_splits(w)

    for i in range(1, len(w) - 3):
        if w[i : i + 4] == "eful" and w[i - 1] not in _VOWELS_Y:
            count -= 1

    if count > 1:
        if w.endswith("ement") and len(w) >= 7 and w[-6] not in _VOWELS_Y:
            count -= 1
        elif w.endswith("ely") and len(w) > 3 and w[-4] not in _VOWELS_Y:
            count -= 1
        elif w.endswith("ed"):
            syllabic_le = w.endswith("led") and len(w) > 3 and w[-4] not in _VOWELS_Y
            if len(w) > 2 and w[-3] not in "td" and w[-3] not in _HARD_VOWELS \
                    and not syllabic_le:
                count -= 1
        elif w.endswith("es"):
            syllabic_le = w.endswith("les") and len(w) > 3 and w[-4] not in _VOWELS_Y
            if len(w) > 2 and w[-3] not in "cgsxz" and w[-3] not in _HARD_VOWELS \
                    and w[-4:-2] not in ("ch", "sh") and not syllabic_le:
                count -= 1
        elif w.endswith("e") and not w.endswith("ee"):
            if not (w.endswith("le") and len(w) > 2 and w[-3] not in _VOWELS_Y):
                count -= 1

    return max(count, 1)


def total_syllables(tokens) -> int:
    """Sum of syllables over alphabetic tokens; non-alphabetic tokens count 1."""
    total = 0
    for t in tokens:
        total += count_syllables(t) if t.isalpha() else 1
    return total
