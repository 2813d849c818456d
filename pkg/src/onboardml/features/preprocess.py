"""Text preprocessing: tokenization, stopword removal, suffix-rule lemmatization.

The lemmatizer is a deterministic approximation: a handful of suffix rules
(-s/-es plurals, -ing, -ed, -er) plus a bundled irregular-form table. It
produces stable, repeatable lemmas without any external lexical database;
linguistically perfect output is a non-goal.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

# Unicode letters and digits; underscores and punctuation are boundaries.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_VOWELS = "aeiou"


def _data_text(name: str) -> str:
    return (resources.files(__package__) / "data" / name).read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    return frozenset(
        line.strip() for line in _data_text("stopwords.txt").splitlines() if line.strip()
    )


@lru_cache(maxsize=1)
def lemma_exceptions() -> dict[str, str]:
    table = {}
    for line in _data_text("lemma_exceptions.tsv").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        form, lemma = line.split("\t")
        table[form] = lemma
    return table


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric boundaries; digits are kept."""
    return _TOKEN_RE.findall(text.lower())


def _is_consonant(ch: str) -> bool:
    return ch.isalpha() and ch not in _VOWELS


def _has_vowel(stem: str) -> bool:
    return any(ch in _VOWELS for ch in stem)


def _repair_stem(stem: str) -> str:
    # "stopp" -> "stop"; ll/ss/zz stay ("fall", "miss", "buzz")
    if (
        len(stem) >= 4
        and stem[-1] == stem[-2]
        and _is_consonant(stem[-1])
        and stem[-1] not in "lsz"
    ):
        return stem[:-1]
    # restore silent e on short consonant-vowel-consonant stems: "mak" -> "make";
    # final w/x/y never take an e ("fix", not "fixe")
    if (
        len(stem) == 3
        and _is_consonant(stem[0])
        and stem[1] in _VOWELS
        and _is_consonant(stem[2])
        and stem[2] not in "wxy"
    ):
        return stem + "e"
    return stem


def lemmatize(token: str) -> str:
    """Map one token to its lemma.

    Rules are applied repeatedly until the token stops changing, which makes
    the mapping idempotent regardless of which suffixes stack up.
    """
    current = token
    while True:
        reduced = _lemmatize_once(current)
        if reduced == current:
            return current
        current = reduced


def _lemmatize_once(token: str) -> str:
    exceptions = lemma_exceptions()
    if token in exceptions:
        return exceptions[token]
    if len(token) <= 3:
        return token
    if token.endswith("ies") and len(token) >= 5:
        return token[:-3] + "y"
    if token.endswith("ied") and len(token) >= 5:
        return token[:-3] + "y"
    if token.endswith("ier") and len(token) >= 5:
        return token[:-3] + "y"
    if token.endswith(("sses", "xes", "zzes", "ches", "shes")):
        return token[:-2]
    if token.endswith("s") and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    if token.endswith("eed"):
        # "agreed" -> "agree"; short forms like "speed" stay put
        return token[:-1] if len(token) >= 6 else token
    for suffix in ("ing", "ed"):
        if token.endswith(suffix):
            stem = token[: -len(suffix)]
            if len(stem) >= 3 and _has_vowel(stem):
                return _repair_stem(stem)
            return token
    if token.endswith("er"):
        stem = token[:-2]
        # only comparative-style doubling is stripped: "bigger" -> "big"
        if (
            len(stem) >= 3
            and stem[-1] == stem[-2]
            and _is_consonant(stem[-1])
            and stem[-1] not in "flsz"
        ):
            return stem[:-1]
    return token


def preprocess(text: str) -> list[str]:
    """lowercase -> tokenize -> drop stopwords -> lemmatize.

    Lemmas that land on a stopword are dropped too, so no output token is
    ever in the stopword list and the pipeline is idempotent.
    """
    stops = stopwords()
    out = []
    for token in tokenize(text):
        if token in stops:
            continue
        lemma = lemmatize(token)
        if lemma not in stops:
            out.append(lemma)
    return out
