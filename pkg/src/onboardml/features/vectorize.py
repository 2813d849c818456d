"""TF-IDF vectorization over preprocessed issue text, plus feature assembly.

Weighting: tf is the raw in-document count; idf = ln((1 + N) / (1 + df)) + 1
with N the training corpus size and df the number of training documents
containing the term. Rows are L2-normalized (zero rows stay zero). The
vocabulary is always built from training documents only; transforming new
documents never mutates it, and out-of-vocabulary terms are ignored.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from ..corpus import Issue, word_count
from .preprocess import preprocess
from .sentiment import SentimentScore, default_lexicon, score_sentiment

TokenDoc = Sequence[str]


@dataclass(frozen=True)
class Vocabulary:
    """Immutable term index in lexicographic term order."""

    index: dict[str, int]               # term -> column
    document_frequency: dict[str, int]  # term -> number of training docs containing it
    corpus_size: int                    # N: training document count
    min_df: int = 1

    def __len__(self) -> int:
        return len(self.index)

    def idf(self, term: str) -> float:
        df = self.document_frequency[term]
        return math.log((1 + self.corpus_size) / (1 + df)) + 1.0

    def idf_vector(self) -> np.ndarray:
        out = np.empty(len(self.index))
        for term, col in self.index.items():
            out[col] = self.idf(term)
        return out


def build_vocabulary(token_docs: Iterable[TokenDoc], min_df: int = 1) -> Vocabulary:
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    df: Counter[str] = Counter()
    n_docs = 0
    for doc in token_docs:
        n_docs += 1
        df.update(set(doc))
    if n_docs == 0:
        raise ValueError("cannot build a vocabulary from zero documents")
    kept = sorted(term for term, count in df.items() if count >= min_df)
    return Vocabulary(
        index={term: col for col, term in enumerate(kept)},
        document_frequency={term: df[term] for term in kept},
        corpus_size=n_docs,
        min_df=min_df,
    )


def transform(vocabulary: Vocabulary, token_docs: Iterable[TokenDoc]) -> sparse.csr_matrix:
    """TF-IDF rows for token documents under a fixed vocabulary."""
    index = vocabulary.index
    idf = vocabulary.idf_vector()
    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    for doc in token_docs:
        counts = Counter(token for token in doc if token in index)
        cols = sorted(index[term] for term in counts)
        row = {index[term]: count for term, count in counts.items()}
        norm = 0.0
        weights = []
        for col in cols:
            weight = row[col] * idf[col]
            weights.append(weight)
            norm += weight * weight
        norm = math.sqrt(norm)
        if norm > 0.0:
            weights = [w / norm for w in weights]
        data.extend(weights)
        indices.extend(cols)
        indptr.append(len(indices))
    n_rows = len(indptr) - 1
    matrix = sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int64)),
        shape=(n_rows, len(vocabulary)),
    )
    return matrix


def vocabulary_to_dict(vocabulary: Vocabulary) -> dict:
    return {
        "corpus_size": vocabulary.corpus_size,
        "min_df": vocabulary.min_df,
        "terms": {
            term: {"index": col, "df": vocabulary.document_frequency[term]}
            for term, col in vocabulary.index.items()
        },
    }


def vocabulary_from_dict(payload: dict) -> Vocabulary:
    terms = payload["terms"]
    index = {term: entry["index"] for term, entry in terms.items()}
    columns = sorted(index.values())
    if columns != list(range(len(columns))):
        raise ValueError("vocabulary columns must be 0..V-1 with no gaps")
    by_col = sorted(index, key=index.get)
    if by_col != sorted(by_col):
        raise ValueError("vocabulary columns must follow lexicographic term order")
    return Vocabulary(
        index=index,
        document_frequency={term: entry["df"] for term, entry in terms.items()},
        corpus_size=payload["corpus_size"],
        min_df=payload.get("min_df", 1),
    )


def vocabulary_hash(vocabulary: Vocabulary) -> str:
    canonical = json.dumps(vocabulary_to_dict(vocabulary), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_vocabulary(vocabulary: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(vocabulary_to_dict(vocabulary), handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_vocabulary(path: str | Path) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as handle:
        return vocabulary_from_dict(json.load(handle))


def issue_tokens(issue: Issue) -> list[str]:
    """Tokens feeding the TF-IDF block: preprocessed title plus description."""
    return preprocess(issue.title + " " + issue.description)


EXTRA_FEATURE_NAMES = ("sentiment_positive", "sentiment_negative", "description_word_count")


@dataclass
class FeatureMatrix:
    """Sparse TF-IDF block with three appended dense columns.

    Appended columns (in order): positive sentiment, negative sentiment, and
    raw description word count. They are intentionally left unscaled.
    """

    issue_ids: list[str]
    vocabulary: Vocabulary
    tfidf: sparse.csr_matrix   # n x |V|
    extras: np.ndarray         # n x 3 float64

    @property
    def n_rows(self) -> int:
        return len(self.issue_ids)

    @property
    def n_features(self) -> int:
        return len(self.vocabulary) + len(EXTRA_FEATURE_NAMES)

    def combined(self) -> sparse.csr_matrix:
        """Single CSR matrix: TF-IDF columns then the appended columns."""
        extras = sparse.csr_matrix(self.extras)
        out = sparse.hstack([self.tfidf, extras], format="csr")
        out.sort_indices()
        return out


def assemble_features(
    issues: Sequence[Issue],
    vocabulary: Vocabulary,
    lexicon: dict[str, int] | None = None,
) -> FeatureMatrix:
    """Feature rows for issues, in the given order. Issue ids must be unique."""
    if lexicon is None:
        lexicon = default_lexicon()
    seen: set[str] = set()
    for issue in issues:
        if issue.id in seen:
            raise ValueError(f"duplicate issue id in feature request: {issue.id!r}")
        seen.add(issue.id)
    tfidf = transform(vocabulary, (issue_tokens(issue) for issue in issues))
    extras = np.empty((len(issues), 3), dtype=np.float64)
    for row, issue in enumerate(issues):
        score = score_sentiment(issue.description, lexicon)
        extras[row, 0] = score.positive
        extras[row, 1] = score.negative
        extras[row, 2] = word_count(issue.description)
    return FeatureMatrix(
        issue_ids=[issue.id for issue in issues],
        vocabulary=vocabulary,
        tfidf=tfidf,
        extras=extras,
    )
