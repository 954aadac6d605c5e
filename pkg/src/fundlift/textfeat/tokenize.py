"""Word tokenization and sentence segmentation for campaign descriptions.

The tokenizer is deliberately small and frozen: downstream readability and
category counts must be reproducible bit-for-bit, so we do not depend on an
external NLP pipeline.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# \w+ with optional internal apostrophes keeps contractions ("don't") whole.
_TOKEN_RE = re.compile(r"\w+(?:['’]\w+)*", re.UNICODE)

# Tokens that end with "." without terminating a sentence. Single letters are
# guarded separately (initials like "Z." in person names).
ABBREVIATIONS = frozenset(
    """mr mrs ms dr prof rev st ave blvd rd jr sr inc ltd co corp vs etc
    approx est dept no fig vol al""".split()
)


@dataclass(frozen=True)
class TokenizedText:
    """Lowercased word tokens plus sentence spans over token indices.

    ``sentences`` holds half-open ``(start, end)`` ranges that are contiguous,
    non-overlapping, and cover every token.
    """

    tokens: tuple[str, ...]
    sentences: tuple[tuple[int, int], ...]
    raw: str

    @property
    def word_count(self) -> int:
        return len(self.tokens)

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)


def _is_sentence_break(raw: str, gap_start: int, gap_end: int, prev_token: str) -> bool:
    """Decide whether the inter-token gap ``raw[gap_start:gap_end]`` ends a sentence."""
    gap = raw[gap_start:gap_end]
    if "!" in gap or "?" in gap:
        return True
    dot = gap.find(".")
    if dot < 0:
        return False
    # "3.5", "example.com": a dot glued to the next token is not a terminator.
    after = gap[dot + 1 :]
    if after and not after[0].isspace() and after[0] not in "\"')]}”’":
        return False
    if gap_end == len(raw) or after or any(c.isspace() for c in gap):
        # Abbreviation guard applies only to "." terminators.
        low = prev_token.lower()
        if low in ABBREVIATIONS or len(low) == 1:
            return False
        return True
    return False


def tokenize(text: str) -> TokenizedText:
    """Split ``text`` into lowercase word tokens and sentence ranges.

    Sentences end on ``.``, ``!`` or ``?`` subject to an abbreviation guard;
    a trailing fragment without a terminator still counts as a sentence.
    Empty text yields zero tokens and zero sentences.
    """
    matches = list(_TOKEN_RE.finditer(text))
    tokens = tuple(m.group(0).lower() for m in matches)
    if not tokens:
        return TokenizedText(tokens=(), sentences=(), raw=text)

    sentences: list[tuple[int, int]] = []
    start = 0
    for i, m in enumerate(matches):
        gap_start = m.end()
        gap_end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        if _is_sentence_break(text, gap_start, gap_end, m.group(0)):
            sentences.append((start, i + 1))
            start = i + 1
    if start < len(tokens):
        sentences.append((start, len(tokens)))
    return TokenizedText(tokens=tokens, sentences=tuple(sentences), raw=text)


def sentence_texts(text: str) -> list[str]:
    """Raw-text slices corresponding to the tokenizer's sentence ranges."""
    tok = tokenize(text)
    matches = list(_TOKEN_RE.finditer(text))
    out = []
    for start, end in tok.sentences:
        lo = matches[start].start()
        # extend through trailing punctuation up to the next sentence's first token
        hi = matches[end].start() if end < len(matches) else len(text)
        out.append(text[lo:hi].strip())
    return out
