from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from vjournal.text import fold, normalize_initials, normalize_last, split_words, stopwords, tokenize


def test_tokenize_examples():
    assert tokenize("Dark-Energy survey") == ["dark", "energy", "survey"]
    assert tokenize("") == []
    assert tokenize("the of and") == []


def test_folding_strips_diacritics_and_short_words():
    assert tokenize("Schrödinger's Équation a b") == ["schrodinger", "equation"]
    assert fold("ÅNGSTRÖM") == "angstrom"
    assert split_words("x-ray  2.5") == ["x", "ray", "2", "5"]


def test_stopword_list_is_fixed():
    words = stopwords()
    assert {"the", "of", "and"} <= words
    assert "energy" not in words
    assert len(words) == 30


def test_name_normalisation():
    assert normalize_last("  O'Dell ") == "o dell"
    assert normalize_last("Müller") == "muller"
    assert normalize_initials("M. J.") == "mj"
    assert normalize_initials("") == ""


@given(st.text())
def test_tokenize_idempotent(t):
    once = tokenize(t)
    assert tokenize(" ".join(once)) == once
