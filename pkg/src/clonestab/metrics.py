"""The three stability measurements.

* Modification frequencies (Hotta): counts modified lines inside/outside
  cloned regions across every consecutive relevant revision pair and
  normalizes by region size and transition count.
* Average last change date (Krinke): blames the last revision only and
  averages per-line last-change dates, at system level (ALC) and file level
  (PF percentages). Works on raw physical lines, comments and blanks
  included, with day-resolution date averaging.
* Average age variant: same blame data, but restricted to CODE lines and
  kept as exact rational day counts, avoiding the comment noise and date
  rounding of the ALC method.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, timedelta
from fractions import Fraction
from typing import Mapping, Sequence

from .clonedetect import LineClassification
from .errors import EmptyHistoryError
from .history import DiffScript, LineOrigin, Revision
from .lexnorm import CODE

logger = logging.getLogger(__name__)

MF_SERIES_HEADER = "ordinal_from,rev_from,rev_to,mc_d,mc_n,loc,loc_d,loc_n"


@dataclass(frozen=True)
class TransitionCounts:
    """Modified-line counts between one pair of consecutive relevant
    revisions; LOC figures are taken at the older side."""

    rev_from: str
    rev_to: str
    ordinal_from: int
    mc_d: int
    mc_n: int
    loc: int
    loc_d: int
    loc_n: int


@dataclass(frozen=True)
class HottaResult:
    mf_d: Fraction
    mf_n: Fraction
    series: tuple[TransitionCounts, ...]


@dataclass(frozen=True)
class KrinkeResult:
    alc_c: date | None
    alc_n: date | None
    pf_c: float
    pf_n: float
    analyzed_files: int
    excluded_files: int


@dataclass(frozen=True)
class VariantResult:
    aa_c: Fraction | None
    aa_n: Fraction | None
    n_c: int
    n_n: int


def transition_counts(
    rev_from: Revision,
    rev_to: Revision,
    cls_from: LineClassification,
    cls_to: LineClassification,
    diffs: Mapping[str, DiffScript],
) -> TransitionCounts:
    """Count modified lines in cloned vs. non-cloned regions.

    Deleted lines are judged against the older revision's classification,
    added lines against the newer one's; COMMENT/BLANK line changes are
    ignored entirely.
    """
    if rev_to.ordinal != rev_from.ordinal + 1:
        raise ValueError(
            f"transition requires consecutive revisions, got ordinals "
            f"{rev_from.ordinal} -> {rev_to.ordinal}"
        )
    mc_d = mc_n = 0
    for path, script in diffs.items():
        from_sets = cls_from.files.get(path)
        to_sets = cls_to.files.get(path)
        if from_sets is not None:
            for line in script.deleted_old_lines():
                if from_sets.tags[line - 1] != CODE:
                    continue
                if line in from_sets.cloned:
                    mc_d += 1
                else:
                    mc_n += 1
        if to_sets is not None:
            for line in script.added_new_lines():
                if to_sets.tags[line - 1] != CODE:
                    continue
                if line in to_sets.cloned:
                    mc_d += 1
                else:
                    mc_n += 1
    return TransitionCounts(
        rev_from.id,
        rev_to.id,
        rev_from.ordinal,
        mc_d,
        mc_n,
        cls_from.loc,
        cls_from.loc_d,
        cls_from.loc_n,
    )


def compute_mf(series: Sequence[TransitionCounts]) -> HottaResult:
    """Modification frequencies over the whole transition series.

    MF_d = (sum MC_d / transitions) * (sum LOC / sum LOC_d), and likewise
    for the non-cloned side; a zero LOC denominator yields 0 with a warning.
    """
    if not series:
        raise EmptyHistoryError("no transitions: history has fewer than two revisions")
    transitions = len(series)
    sum_mc_d = sum(t.mc_d for t in series)
    sum_mc_n = sum(t.mc_n for t in series)
    sum_loc = sum(t.loc for t in series)
    sum_loc_d = sum(t.loc_d for t in series)
    sum_loc_n = sum(t.loc_n for t in series)
    if sum_loc_d == 0:
        logger.warning("no cloned lines in any revision; MF_d reported as 0")
        mf_d = Fraction(0)
    else:
        mf_d = Fraction(sum_mc_d, transitions) * Fraction(sum_loc, sum_loc_d)
    if sum_loc_n == 0:
        logger.warning("no non-cloned lines in any revision; MF_n reported as 0")
        mf_n = Fraction(0)
    else:
        mf_n = Fraction(sum_mc_n, transitions) * Fraction(sum_loc, sum_loc_n)
    return HottaResult(mf_d, mf_n, tuple(series))


def average_date(dates: Sequence[date]) -> date:
    """Oldest date plus the mean distance in days over *all* entries
    (the oldest contributes distance 0), truncated toward the oldest."""
    if not dates:
        raise ValueError("average_date requires at least one date")
    oldest = min(dates)
    total = sum((d - oldest).days for d in dates)
    return oldest + timedelta(days=total // len(dates))


def krinke_metrics(
    rev_r: Revision,
    blame: Mapping[str, Sequence[LineOrigin]],
    classification: LineClassification,
) -> KrinkeResult:
    """Average last-change dates at the last revision.

    System level averages over raw physical lines (clone-region lines are
    the cloned side, every other line the non-cloned side). File level
    considers only files containing both kinds of line: PF_c / PF_n are the
    percentages whose per-file cloned average date is strictly older /
    newer; ties count toward neither.
    """
    cloned_dates: list[date] = []
    noncloned_dates: list[date] = []
    analyzed = excluded = 0
    older = newer = 0
    for path, sets in sorted(classification.files.items()):
        origins = blame[path]
        file_cloned: list[date] = []
        file_noncloned: list[date] = []
        for origin in origins:
            day = origin.origin_date.date()
            if origin.line_no in sets.region_lines:
                file_cloned.append(day)
            else:
                file_noncloned.append(day)
        cloned_dates.extend(file_cloned)
        noncloned_dates.extend(file_noncloned)
        if not file_cloned or not file_noncloned:
            excluded += 1
            continue
        analyzed += 1
        file_alc_c = average_date(file_cloned)
        file_alc_n = average_date(file_noncloned)
        if file_alc_c < file_alc_n:
            older += 1
        elif file_alc_c > file_alc_n:
            newer += 1
    if cloned_dates:
        alc_c = average_date(cloned_dates)
    else:
        logger.warning("no cloned lines at revision %s; ALC_c is undefined", rev_r.id)
        alc_c = None
    if noncloned_dates:
        alc_n = average_date(noncloned_dates)
    else:
        logger.warning("no non-cloned lines at revision %s; ALC_n is undefined", rev_r.id)
        alc_n = None
    pf_c = 100.0 * older / analyzed if analyzed else 0.0
    pf_n = 100.0 * newer / analyzed if analyzed else 0.0
    return KrinkeResult(alc_c, alc_n, pf_c, pf_n, analyzed, excluded)


def variant_metrics(
    rev_r: Revision,
    blame: Mapping[str, Sequence[LineOrigin]],
    classification: LineClassification,
) -> VariantResult:
    """Mean per-line age in days at the last revision, CODE lines only,
    kept as exact rationals."""
    ref_day = rev_r.date
    cloned_total = noncloned_total = 0
    n_c = n_n = 0
    for path, sets in sorted(classification.files.items()):
        origins = blame[path]
        for origin in origins:
            if sets.tags[origin.line_no - 1] != CODE:
                continue
            age = (ref_day - origin.origin_date.date()).days
            if origin.line_no in sets.cloned:
                cloned_total += age
                n_c += 1
            else:
                noncloned_total += age
                n_n += 1
    if n_c:
        aa_c = Fraction(cloned_total, n_c)
    else:
        logger.warning("no cloned CODE lines at revision %s; AA_c is undefined", rev_r.id)
        aa_c = None
    if n_n:
        aa_n = Fraction(noncloned_total, n_n)
    else:
        logger.warning("no non-cloned CODE lines at revision %s; AA_n is undefined", rev_r.id)
        aa_n = None
    return VariantResult(aa_c, aa_n, n_c, n_n)
