"""Dual-polarity sentiment scoring from a bundled strength lexicon.

Scores are computed on the raw text (no stopword removal, no lemmatization):
lowercase whole-word matching against term strengths. Booster words and
negation detection are deliberately out of scope; the score reflects lexicon
hits only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .preprocess import tokenize

# no lexicon hit: "not positive" / "not negative"
NEUTRAL_POSITIVE = 1
NEUTRAL_NEGATIVE = -1

MAX_STRENGTH = 5
MIN_LISTED_STRENGTH = 2  # lexicon entries must be at least this strong


@dataclass(frozen=True)
class SentimentScore:
    positive: int  # in +1..+5
    negative: int  # in -5..-1


def parse_lexicon(text: str, source: str = "<lexicon>") -> dict[str, int]:
    lexicon: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{source} line {line_no}: expected term<TAB>strength")
        term, raw_strength = parts
        try:
            strength = int(raw_strength)
        except ValueError:
            raise ValueError(f"{source} line {line_no}: strength must be an integer") from None
        if not (MIN_LISTED_STRENGTH <= abs(strength) <= MAX_STRENGTH):
            raise ValueError(
                f"{source} line {line_no}: strength {strength} outside +-2..+-5"
            )
        lexicon[term.lower()] = strength
    return lexicon


def load_lexicon(path: str | Path) -> dict[str, int]:
    path = Path(path)
    return parse_lexicon(path.read_text(encoding="utf-8"), source=str(path))


@lru_cache(maxsize=1)
def default_lexicon() -> dict[str, int]:
    text = (resources.files(__package__) / "data" / "sentiment_lexicon.tsv").read_text(
        encoding="utf-8"
    )
    return parse_lexicon(text, source="sentiment_lexicon.tsv")


def score_sentiment(text: str, lexicon: dict[str, int] | None = None) -> SentimentScore:
    """positive = strongest positive hit (default +1), negative = strongest
    negative hit (default -1). Both polarities can be non-neutral at once."""
    if lexicon is None:
        lexicon = default_lexicon()
    positive = NEUTRAL_POSITIVE
    negative = NEUTRAL_NEGATIVE
    for word in tokenize(text):
        strength = lexicon.get(word)
        if strength is None:
            continue
        if strength > 0:
            positive = max(positive, strength)
        else:
            negative = min(negative, strength)
    return SentimentScore(positive=positive, negative=negative)
