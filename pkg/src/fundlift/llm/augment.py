"""Counterfactual augmentation and length-matched neutral extension."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import FundliftError, SchemaError
from ..textfeat.tokenize import sentence_texts, tokenize
from .client import LlmClient, render_prompt


class PrefixViolationError(FundliftError):
    """Augmented text does not begin with the original text verbatim."""

    def __init__(self, message: str, raw_output: str):
        super().__init__(message)
        self.raw_output = raw_output


@dataclass(frozen=True)
class AugmentationResult:
    """The three rewrite variants returned by the augmentation prompt."""

    correct_three: str
    add_gratitude: str
    minus_gratitude: str


def _validate_augment_reply(reply: dict) -> None:
    missing = [f for f in ("correct_three", "add_gratitude", "minus_gratitude") if f not in reply]
    if missing:
        raise SchemaError(f"augmentation reply missing fields {missing}")


def augment_three(description: str, client: LlmClient) -> AugmentationResult:
    """Rewrite a description to add gratitude, the $500 match note, and urgency.

    ``correct_three`` and ``add_gratitude`` must begin with the original text
    verbatim; a violating reply is retried once and then surfaced with the
    raw output attached.
    """
    if not description.strip():
        raise SchemaError("augment_three requires a nonempty description")
    prompt = render_prompt("augment", text=description)
    reply = client.complete_json(prompt, validate=_validate_augment_reply)
    for attempt in (0, 1):
        correct_three = str(reply["correct_three"])
        add_gratitude = str(reply["add_gratitude"])
        if correct_three.startswith(description) and add_gratitude.startswith(description):
            return AugmentationResult(
                correct_three=correct_three,
                add_gratitude=add_gratitude,
                minus_gratitude=str(reply["minus_gratitude"]),
            )
        if attempt == 0:
            reply = client.complete_json(
                prompt, validate=_validate_augment_reply, bypass_cache=True
            )
    raise PrefixViolationError(
        "augmented text does not begin with the original text after one retry",
        raw_output=str(reply["correct_three"]),
    )


def extend_neutral(description: str, target_added_words: int, client: LlmClient) -> str:
    """Length-matched paraphrase extension that adds no new information.

    The first and last sentences of the output must equal the original's, and
    the added word count must land within +/-25% of the target.
    """
    sentences = sentence_texts(description)
    if len(sentences) < 2:
        raise SchemaError("extend_neutral requires a description with at least 2 sentences")
    if target_added_words <= 0:
        raise SchemaError("target_added_words must be positive")
    prompt = render_prompt("extend", text=description, added_words=target_added_words)
    result = client.complete(prompt)

    out_sentences = sentence_texts(result)
    if not out_sentences or out_sentences[0] != sentences[0]:
        raise SchemaError("extended text does not start with the original first sentence")
    if out_sentences[-1] != sentences[-1]:
        raise SchemaError("extended text does not end with the original last sentence")
    added = tokenize(result).word_count - tokenize(description).word_count
    if not (0.75 * target_added_words <= added <= 1.25 * target_added_words):
        raise SchemaError(
            f"extension added {added} words, outside +/-25% of target {target_added_words}"
        )
    return result
