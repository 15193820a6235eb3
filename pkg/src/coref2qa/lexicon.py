"""Shared word lists: pronouns, person pronouns, wh-words, articles.

The pronoun list decides what counts as "non-pronominal" during antecedent
selection and mention classification. It is deliberately a plain frozenset so
callers can pass their own replacement.
"""

from __future__ import annotations

PRONOUNS: frozenset[str] = frozenset(
    {
        # personal
        "i", "you", "he", "she", "it", "we", "they",
        "me", "him", "her", "us", "them",
        # possessive
        "my", "your", "his", "hers", "its", "our", "their",
        "mine", "yours", "ours", "theirs",
        # reflexive
        "myself", "yourself", "himself", "herself", "itself",
        "ourselves", "yourselves", "themselves",
        # demonstrative
        "this", "that", "these", "those",
    }
)

# Pronouns that imply a human referent; used for who-vs-what decisions.
PERSON_PRONOUNS: frozenset[str] = frozenset(
    {
        "i", "you", "he", "she", "we",
        "me", "him", "her", "us",
        "my", "your", "his", "hers", "our",
        "mine", "yours", "ours",
        "myself", "yourself", "himself", "herself",
        "ourselves", "yourselves",
    }
)

WH_WORDS: frozenset[str] = frozenset(
    {"who", "whom", "whose", "what", "which", "when", "where", "why", "how"}
)

ARTICLES: frozenset[str] = frozenset({"a", "an", "the"})


def is_pronominal(text: str, pronouns: frozenset[str] = PRONOUNS) -> bool:
    """True when every whitespace token of ``text`` is a pronoun."""
    tokens = text.split()
    return bool(tokens) and all(t.lower() in pronouns for t in tokens)
