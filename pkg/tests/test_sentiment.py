"""Dual-polarity lexicon sentiment scoring."""

import pytest
from hypothesis import given, strategies as st

from onboardml.features.sentiment import (
    SentimentScore,
    default_lexicon,
    parse_lexicon,
    score_sentiment,
)


def test_no_hits_yields_neutral_pair():
    assert score_sentiment("the parser emits tokens") == SentimentScore(1, -1)
    assert score_sentiment("") == SentimentScore(1, -1)


def test_max_positive_min_negative():
    # "loved" is +3, "worthless" and "garbage" are -4 in the bundled lexicon
    score = score_sentiment("loved it, but the rest is worthless garbage")
    assert score == SentimentScore(3, -4)


def test_both_polarities_can_fire_at_once():
    score = score_sentiment("loved the idea, hated that worthless dialog")
    assert score.positive >= 2
    assert score.negative <= -2


def test_matching_is_case_insensitive_whole_word():
    assert score_sentiment("GREAT").positive == score_sentiment("great").positive
    # substrings do not match: "greatest" is not in the lexicon
    assert score_sentiment("greatest").positive == 1


def test_punctuation_boundaries_do_not_block_matches():
    assert score_sentiment("broken!").negative == -2
    assert score_sentiment("(awesome)").positive == 4


def test_custom_lexicon():
    lexicon = parse_lexicon("joy\t5\ndoom\t-5\n")
    assert score_sentiment("joy and doom", lexicon) == SentimentScore(5, -5)
    assert score_sentiment("nothing here", lexicon) == SentimentScore(1, -1)


def test_parse_lexicon_rejects_bad_rows():
    with pytest.raises(ValueError):
        parse_lexicon("joy 5\n")  # missing tab
    with pytest.raises(ValueError):
        parse_lexicon("joy\tx\n")
    with pytest.raises(ValueError):
        parse_lexicon("joy\t1\n")  # below the minimum listed strength
    with pytest.raises(ValueError):
        parse_lexicon("joy\t6\n")


def test_bundled_lexicon_strengths_in_range():
    lexicon = default_lexicon()
    assert lexicon
    for term, strength in lexicon.items():
        assert term == term.lower()
        assert 2 <= abs(strength) <= 5


@given(st.text(max_size=300))
def test_score_bounds_hold_for_any_input(text):
    score = score_sentiment(text)
    assert 1 <= score.positive <= 5
    assert -5 <= score.negative <= -1


@given(st.lists(st.sampled_from(sorted(default_lexicon())), min_size=1, max_size=8))
def test_scores_match_direct_max_min(terms):
    lexicon = default_lexicon()
    score = score_sentiment(" ".join(terms))
    hits = [lexicon[t] for t in terms]
    expected_pos = max([s for s in hits if s > 0], default=1)
    expected_neg = min([s for s in hits if s < 0], default=-1)
    assert score == SentimentScore(max(expected_pos, 1), min(expected_neg, -1))
