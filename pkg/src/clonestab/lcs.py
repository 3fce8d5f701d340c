"""Longest-common-subsequence primitives used by both the line differ and
the clone detector.

The matcher is the greedy O(ND) forward algorithm over edit-distance
diagonals. It always returns a maximum-length common subsequence, which the
diff contract (minimal edit script) and the dissimilarity measure both
require; stdlib difflib.SequenceMatcher does not guarantee maximality.
"""

from __future__ import annotations

from typing import Sequence


def lcs_matches(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """Return matched index pairs (i, j) of one maximal common subsequence.

    Pairs are strictly increasing in both coordinates; the result is empty
    when either side is empty or nothing matches.
    """
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    total = n + m
    offset = total
    frontier = [0] * (2 * total + 1)
    # Per-diagonal backward chains of matched pairs, shared structurally.
    chains: list[tuple | None] = [None] * (2 * total + 1)
    for d in range(total + 1):
        for k in range(-d, d + 1, 2):
            idx = offset + k
            if k == -d or (k != d and frontier[idx - 1] < frontier[idx + 1]):
                x = frontier[idx + 1]
                chain = chains[idx + 1]
            else:
                x = frontier[idx - 1] + 1
                chain = chains[idx - 1]
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                chain = ((x, y), chain)
                x += 1
                y += 1
            if x >= n and y >= m:
                out = []
                while chain is not None:
                    out.append(chain[0])
                    chain = chain[1]
                out.reverse()
                return out
            frontier[idx] = x
            chains[idx] = chain
    raise AssertionError("unreachable: edit distance exceeds len(a) + len(b)")


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence of a and b."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    total = n + m
    offset = total
    frontier = [0] * (2 * total + 1)
    for d in range(total + 1):
        for k in range(-d, d + 1, 2):
            idx = offset + k
            if k == -d or (k != d and frontier[idx - 1] < frontier[idx + 1]):
                x = frontier[idx + 1]
            else:
                x = frontier[idx - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            if x >= n and y >= m:
                return (n + m - d) // 2
            frontier[idx] = x
    raise AssertionError("unreachable: edit distance exceeds len(a) + len(b)")


def lcs_at_least(a: Sequence[str], b: Sequence[str], min_length: int) -> bool:
    """True iff |LCS(a, b)| >= min_length.

    Aborts the diagonal sweep as soon as the remaining edit budget cannot
    reach min_length, which is far cheaper than a full lcs_length for
    dissimilar inputs.
    """
    n, m = len(a), len(b)
    if min_length <= 0:
        return True
    if min_length > min(n, m):
        return False
    max_d = n + m - 2 * min_length
    total = n + m
    offset = total
    frontier = [0] * (2 * total + 1)
    for d in range(min(max_d, total) + 1):
        for k in range(-d, d + 1, 2):
            idx = offset + k
            if k == -d or (k != d and frontier[idx - 1] < frontier[idx + 1]):
                x = frontier[idx + 1]
            else:
                x = frontier[idx - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            if x >= n and y >= m:
                return (n + m - d) // 2 >= min_length
            frontier[idx] = x
    return False
