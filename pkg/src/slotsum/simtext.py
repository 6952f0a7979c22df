"""String similarity metrics.

Two metrics drive the whole pipeline: normalized sorted Indel similarity
(used for value/span and key-name matching) and bag-of-words Jaccard
similarity (used for corpus alignment). Both are pure functions returning
scores in [0, 1].
"""

from __future__ import annotations


def tokenize(text: str) -> list[str]:
    """Lowercased tokens split on runs of whitespace.

    Punctuation is kept as part of tokens; no stripping or stemming.
    """
    return text.lower().split()


def sorted_join(text: str) -> str:
    """Tokenize, sort lexicographically, and re-join with single spaces."""
    return " ".join(sorted(tokenize(text)))


def indel_distance(a: str, b: str) -> int:
    """Minimum number of single-character insertions and deletions
    transforming ``a`` into ``b``.

    Equals ``len(a) + len(b) - 2 * LCS(a, b)``; computed here via a
    two-row longest-common-subsequence table.
    """
    # Trim the common prefix and suffix; they never contribute edits.
    lo = 0
    hi_a, hi_b = len(a), len(b)
    while lo < hi_a and lo < hi_b and a[lo] == b[lo]:
        lo += 1
    while hi_a > lo and hi_b > lo and a[hi_a - 1] == b[hi_b - 1]:
        hi_a -= 1
        hi_b -= 1
    a, b = a[lo:hi_a], b[lo:hi_b]
    if not a:
        return len(b)
    if not b:
        return len(a)

    previous = [0] * (len(b) + 1)
    for ch_a in a:
        current = [0] * (len(b) + 1)
        for j, ch_b in enumerate(b):
            if ch_a == ch_b:
                current[j + 1] = previous[j] + 1
            else:
                current[j + 1] = max(previous[j + 1], current[j])
        previous = current
    lcs = previous[len(b)]
    return len(a) + len(b) - 2 * lcs


def indel_similarity(a: str, b: str) -> float:
    """Normalized Indel similarity: ``1 - distance / (len(a) + len(b))``.

    Two empty strings are identical, hence 1.0.
    """
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    return 1.0 - indel_distance(a, b) / total


def sorted_indel_sim(a: str, b: str) -> float:
    """Normalized Indel similarity after sorting each string's tokens.

    Both strings are tokenized, sorted, and space-joined before the
    character-level Indel similarity is computed, so token order never
    affects the score: sim("smith john", "john smith") == 1.0.
    """
    return indel_similarity(sorted_join(a), sorted_join(b))


def jaccard_bow(a: str, b: str) -> float:
    """Bag-of-words Jaccard similarity: |A ∩ B| / |A ∪ B| on token sets.

    Two empty token sets are identical, hence 1.0.
    """
    set_a = set(tokenize(a))
    set_b = set(tokenize(b))
    if not set_a and not set_b:
        return 1.0
    return len(set_a & set_b) / len(set_a | set_b)
