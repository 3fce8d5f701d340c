"""Type-1/2/3 clone-class detection over extracted function bodies, and the
per-line cloned / non-cloned classification every stability method reads.

Detection settings per clone type: Type-1 compares normalized text as-is
with a 0 dissimilarity budget, Type-2 blind-renames first (still 0), Type-3
blind-renames and admits dissimilarity up to 20% (inclusive). Classes are
connected components over clone pairs, so members of one class need not all
be pairwise within the threshold.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import InternalConsistencyError
from .history import FileSnapshot
from .lcs import lcs_at_least, lcs_length
from .lexnorm import CODE, Block, LineClasses, blind_rename

logger = logging.getLogger(__name__)

RENAME_NONE = "none"
RENAME_BLIND = "blind"

DEFAULT_MIN_BLOCK_LINES = 5


@dataclass(frozen=True)
class CloneConfig:
    clone_type: int
    rename: str
    dissimilarity_threshold: float
    min_block_lines: int = DEFAULT_MIN_BLOCK_LINES

    def __post_init__(self):
        if self.clone_type not in (1, 2, 3):
            raise ValueError(f"clone_type must be 1, 2 or 3, got {self.clone_type}")
        if self.rename not in (RENAME_NONE, RENAME_BLIND):
            raise ValueError(f"rename must be 'none' or 'blind', got {self.rename!r}")
        if not 0.0 <= self.dissimilarity_threshold <= 1.0:
            raise ValueError("dissimilarity_threshold must be within [0, 1]")
        if self.min_block_lines < 1:
            raise ValueError("min_block_lines must be >= 1")

    def cache_key(self) -> str:
        raw = f"{self.clone_type}|{self.rename}|{self.dissimilarity_threshold!r}|{self.min_block_lines}"
        return hashlib.sha1(raw.encode()).hexdigest()[:16]


def config_for_type(clone_type: int, min_block_lines: int = DEFAULT_MIN_BLOCK_LINES) -> CloneConfig:
    """Default settings per clone type: (none, 0%), (blind, 0%), (blind, 20%)."""
    if clone_type == 1:
        return CloneConfig(1, RENAME_NONE, 0.0, min_block_lines)
    if clone_type == 2:
        return CloneConfig(2, RENAME_BLIND, 0.0, min_block_lines)
    if clone_type == 3:
        return CloneConfig(3, RENAME_BLIND, 0.20, min_block_lines)
    raise ValueError(f"unknown clone type {clone_type}")


@dataclass(frozen=True)
class Region:
    path: str
    start_line: int
    end_line: int


@dataclass(frozen=True)
class CloneClass:
    id: str
    clone_type: int
    members: tuple[Region, ...]


def dissimilarity(a: Sequence[str], b: Sequence[str]) -> float:
    """1 - |LCS(a, b)| / max(|a|, |b|); symmetric, in [0, 1]."""
    if not a or not b:
        raise ValueError("dissimilarity requires two non-empty line sequences")
    longest = max(len(a), len(b))
    return (longest - lcs_length(a, b)) / longest


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Anchor on the smaller index for deterministic components.
            if ra > rb:
                ra, rb = rb, ra
            self.parent[rb] = ra


class CloneDetector:
    """Detects clone classes for one configuration.

    Holds a pair-verdict cache keyed by content digests, so re-detecting a
    history where most blocks are unchanged between revisions costs little.
    """

    def __init__(self, config: CloneConfig):
        self.config = config
        self._threshold = Fraction(config.dissimilarity_threshold)
        self._pair_cache: dict[tuple[str, str], bool] = {}

    def _key_lines(self, block: Block) -> tuple[str, ...]:
        if self.config.rename == RENAME_BLIND:
            return blind_rename(block).normalized_lines
        return block.normalized_lines

    def _is_pair(self, lines_a: Sequence[str], lines_b: Sequence[str],
                 digest_a: str, digest_b: str) -> bool:
        if digest_a == digest_b:
            return True
        key = (digest_a, digest_b) if digest_a < digest_b else (digest_b, digest_a)
        cached = self._pair_cache.get(key)
        if cached is not None:
            return cached
        longest = max(len(lines_a), len(lines_b))
        num, den = self._threshold.numerator, self._threshold.denominator
        # lcs >= ceil(longest * (1 - t)), compared exactly.
        min_needed = -(-(longest * (den - num)) // den)
        verdict = lcs_at_least(lines_a, lines_b, min_needed)
        self._pair_cache[key] = verdict
        return verdict

    def detect(self, blocks: Sequence[Block]) -> list[CloneClass]:
        eligible = [b for b in blocks if len(b.normalized_lines) >= self.config.min_block_lines]
        if len(eligible) < 2:
            return []
        keyed = []
        for block in eligible:
            lines = self._key_lines(block)
            digest = hashlib.sha1("\n".join(lines).encode()).hexdigest()
            keyed.append((block, lines, digest))
        # Deterministic processing order regardless of caller ordering.
        keyed.sort(key=lambda item: (item[0].path, item[0].start_line, item[0].end_line))
        uf = _UnionFind(len(keyed))
        if self._threshold == 0:
            groups: dict[str, int] = {}
            for i, (_, _, digest) in enumerate(keyed):
                first = groups.setdefault(digest, i)
                if first != i:
                    uf.union(first, i)
        else:
            order = sorted(range(len(keyed)), key=lambda i: len(keyed[i][1]))
            num, den = self._threshold.numerator, self._threshold.denominator
            for a_pos, i in enumerate(order):
                _, lines_i, digest_i = keyed[i]
                len_i = len(lines_i)
                # Lengths beyond len_i / (1 - t) cannot meet the threshold.
                max_len = (len_i * den) // (den - num)
                for j in order[a_pos + 1 :]:
                    _, lines_j, digest_j = keyed[j]
                    if len(lines_j) > max_len:
                        break
                    if uf.find(i) == uf.find(j):
                        continue
                    if self._is_pair(lines_i, lines_j, digest_i, digest_j):
                        uf.union(i, j)
        components: dict[int, list[int]] = {}
        for i in range(len(keyed)):
            components.setdefault(uf.find(i), []).append(i)
        classes: list[list[Region]] = []
        for indices in components.values():
            if len(indices) < 2:
                continue
            members = sorted(
                {
                    Region(keyed[i][0].path, keyed[i][0].start_line, keyed[i][0].end_line)
                    for i in indices
                },
                key=lambda r: (r.path, r.start_line, r.end_line),
            )
            if len(members) < 2:
                continue
            classes.append(members)
        classes.sort(key=lambda ms: (ms[0].path, ms[0].start_line, ms[0].end_line))
        return [
            CloneClass(f"t{self.config.clone_type}-{seq:04d}", self.config.clone_type, tuple(ms))
            for seq, ms in enumerate(classes)
        ]


def detect_clone_classes(blocks: Sequence[Block], config: CloneConfig) -> list[CloneClass]:
    """One-shot detection; see CloneDetector for the cache-reusing form."""
    return CloneDetector(config).detect(blocks)


def clone_pairs(blocks: Sequence[Block], config: CloneConfig) -> set[frozenset[Region]]:
    """All clone pairs under `config`, for nesting checks and tests."""
    detector = CloneDetector(config)
    eligible = [b for b in blocks if len(b.normalized_lines) >= config.min_block_lines]
    keyed = []
    for block in eligible:
        lines = detector._key_lines(block)
        digest = hashlib.sha1("\n".join(lines).encode()).hexdigest()
        keyed.append((block, lines, digest))
    pairs: set[frozenset[Region]] = set()
    for i in range(len(keyed)):
        for j in range(i + 1, len(keyed)):
            bi, li, di = keyed[i]
            bj, lj, dj = keyed[j]
            if detector._is_pair(li, lj, di, dj):
                pairs.add(
                    frozenset(
                        (
                            Region(bi.path, bi.start_line, bi.end_line),
                            Region(bj.path, bj.start_line, bj.end_line),
                        )
                    )
                )
    return pairs


# ----------------------------
# Line classification
# ----------------------------


@dataclass(frozen=True)
class FileLineSets:
    """Line sets of one file at one revision."""

    tags: tuple[str, ...]
    region_lines: frozenset[int]  # raw union of member regions
    cloned: frozenset[int]  # region lines that are CODE

    @property
    def loc(self) -> int:
        return sum(1 for t in self.tags if t == CODE)

    @property
    def loc_d(self) -> int:
        return len(self.cloned)

    @property
    def loc_n(self) -> int:
        return self.loc - self.loc_d


@dataclass(frozen=True)
class LineClassification:
    """Cloned vs. non-cloned status of every physical line of a revision."""

    clone_type: int
    files: Mapping[str, FileLineSets]

    @property
    def loc(self) -> int:
        return sum(f.loc for f in self.files.values())

    @property
    def loc_d(self) -> int:
        return sum(f.loc_d for f in self.files.values())

    @property
    def loc_n(self) -> int:
        return sum(f.loc_n for f in self.files.values())


def classify_lines(
    snapshots: Sequence[FileSnapshot],
    classes: Iterable[CloneClass],
    tags_by_path: Mapping[str, LineClasses],
    clone_type: int,
) -> LineClassification:
    """Union the member regions of `classes` onto the revision's files.

    Cloned lines are region lines that are CODE; overlapping regions count
    once. A region outside its file's bounds is a detector bug, not bad
    input.
    """
    region_by_path: dict[str, set[int]] = {s.path: set() for s in snapshots}
    sizes = {s.path: len(s.lines) for s in snapshots}
    for cls in classes:
        for region in cls.members:
            if region.path not in sizes:
                raise InternalConsistencyError(
                    f"clone region references unknown file {region.path}"
                )
            if not (1 <= region.start_line <= region.end_line <= sizes[region.path]):
                raise InternalConsistencyError(
                    f"clone region {region} exceeds {region.path} "
                    f"({sizes[region.path]} lines)"
                )
            region_by_path[region.path].update(
                range(region.start_line, region.end_line + 1)
            )
    files: dict[str, FileLineSets] = {}
    for snap in snapshots:
        tags = tags_by_path[snap.path].tags
        region = frozenset(region_by_path[snap.path])
        cloned = frozenset(ln for ln in region if tags[ln - 1] == CODE)
        files[snap.path] = FileLineSets(tags, region, cloned)
    return LineClassification(clone_type, files)
