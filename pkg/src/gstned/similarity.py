"""String similarities: normalized indel (LCS) ratio and Jaro-Winkler."""

from __future__ import annotations

from .kg import normalize_surface


def _match_masks(pattern: str) -> dict[str, int]:
    masks: dict[str, int] = {}
    for i, ch in enumerate(pattern):
        masks[ch] = masks.get(ch, 0) | (1 << i)
    return masks


def lcs_length(a: str, b: str, masks: dict[str, int] | None = None) -> int:
    """Length of the longest common subsequence, bit-parallel over ``a``.

    ``masks`` may carry a precomputed ``_match_masks(a)`` when one pattern is
    compared against many strings.
    """
    if not a or not b:
        return 0
    if masks is None:
        masks = _match_masks(a)
    full = (1 << len(a)) - 1
    v = full
    for ch in b:
        m = masks.get(ch)
        if m is None:
            continue
        u = v & m
        v = ((v + u) | (v - u)) & full
    return len(a) - bin(v).count("1")


def indel_similarity(a: str, b: str) -> float:
    """``1 - indel(a, b) / (|a| + |b|)`` on the raw strings."""
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    return 2.0 * lcs_length(a, b) / total


def fuzzy_score(a: str, b: str) -> float:
    """Indel ratio of the normalized surfaces, in [0, 1]."""
    return indel_similarity(normalize_surface(a), normalize_surface(b))


def jaro(a: str, b: str) -> float:
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    window = max(max(la, lb) // 2 - 1, 0)
    a_hit = [False] * la
    b_hit = [False] * lb
    matches = 0
    for i, ch in enumerate(a):
        lo, hi = max(0, i - window), min(lb, i + window + 1)
        for j in range(lo, hi):
            if not b_hit[j] and b[j] == ch:
                a_hit[i] = b_hit[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    a_seq = [ch for ch, hit in zip(a, a_hit) if hit]
    b_seq = [ch for ch, hit in zip(b, b_hit) if hit]
    half_transpositions = sum(x != y for x, y in zip(a_seq, b_seq))
    t = half_transpositions // 2
    m = float(matches)
    return (m / la + m / lb + (m - t) / m) / 3.0


def jaro_winkler(
    a: str,
    b: str,
    prefix_scale: float = 0.1,
    max_prefix: int = 4,
    boost_threshold: float = 0.7,
) -> float:
    """Jaro similarity with the Winkler common-prefix boost.

    The boost applies only when the plain Jaro score exceeds
    ``boost_threshold`` (Winkler's original rule).
    """
    sim = jaro(a, b)
    # a Jaro score sitting exactly on the threshold can round just above it
    if sim <= boost_threshold + 1e-12:
        return sim
    prefix = 0
    for x, y in zip(a[:max_prefix], b[:max_prefix]):
        if x != y:
            break
        prefix += 1
    return sim + prefix * prefix_scale * (1.0 - sim)
