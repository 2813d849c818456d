"""Text feature extraction: preprocessing, sentiment, TF-IDF assembly."""

from .preprocess import lemmatize, preprocess, stopwords, tokenize
from .sentiment import (
    NEUTRAL_NEGATIVE,
    NEUTRAL_POSITIVE,
    SentimentScore,
    default_lexicon,
    load_lexicon,
    parse_lexicon,
    score_sentiment,
)
from .vectorize import (
    EXTRA_FEATURE_NAMES,
    FeatureMatrix,
    Vocabulary,
    assemble_features,
    build_vocabulary,
    issue_tokens,
    load_vocabulary,
    save_vocabulary,
    transform,
    vocabulary_from_dict,
    vocabulary_hash,
    vocabulary_to_dict,
)

__all__ = [
    "EXTRA_FEATURE_NAMES",
    "FeatureMatrix",
    "NEUTRAL_NEGATIVE",
    "NEUTRAL_POSITIVE",
    "SentimentScore",
    "Vocabulary",
    "assemble_features",
    "build_vocabulary",
    "default_lexicon",
    "issue_tokens",
    "lemmatize",
    "load_lexicon",
    "load_vocabulary",
    "parse_lexicon",
    "preprocess",
    "save_vocabulary",
    "score_sentiment",
    "stopwords",
    "tokenize",
    "transform",
    "vocabulary_from_dict",
    "vocabulary_hash",
    "vocabulary_to_dict",
]
