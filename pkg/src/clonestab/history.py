"""Uniform access to a revision history.

Two backends expose the same operations: a live git repository (driven
through the git executable) and a deterministic snapshot-directory fixture
(one `rev-NNNN/` directory per revision, each holding a `manifest.txt` and a
`files/` tree). On top of the backends sit line diffing and line-origin
(blame) computation; the snapshot backend derives blame natively by
propagating line identity through the diffs, the git backend shells out to
`git blame --line-porcelain`.
"""

from __future__ import annotations

import fnmatch
import hashlib
import logging
import re
import subprocess
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    ConfigError,
    EmptyHistoryError,
    PathNotFoundError,
    RevisionNotFoundError,
)
from .lcs import lcs_matches

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"
_REV_DIR_RE = re.compile(r"^rev-(\d{4,})$")


# ----------------------------
# Value types
# ----------------------------


@dataclass(frozen=True)
class Revision:
    """One commit of the analyzed history, in first-parent order.

    `ordinal` is the position among the *relevant* revisions (those that
    change at least one filtered file); it is dense and authoritative for
    ordering. Timestamps are UTC.
    """

    id: str
    timestamp: datetime
    message: str
    ordinal: int

    @property
    def date(self):
        return self.timestamp.astimezone(timezone.utc).date()


@dataclass(frozen=True)
class FileSnapshot:
    """Text content of one file at one revision, as 1-based lines."""

    path: str
    lines: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.lines)


@dataclass(frozen=True)
class Hunk:
    """One edit: `old_count` lines deleted starting at `old_start` replaced
    by `new_count` lines at `new_start` (either count may be zero). Line
    numbers are 1-based; for a pure insertion `old_start` is the old line
    the new lines are inserted before.
    """

    old_start: int
    old_count: int
    new_start: int
    new_count: int

    def deleted_lines(self) -> range:
        return range(self.old_start, self.old_start + self.old_count)

    def added_lines(self) -> range:
        return range(self.new_start, self.new_start + self.new_count)


@dataclass(frozen=True)
class DiffScript:
    """Minimal line edit script between two file versions."""

    old_path: str | None
    new_path: str | None
    hunks: tuple[Hunk, ...]

    @property
    def is_empty(self) -> bool:
        return not self.hunks

    def deleted_old_lines(self) -> list[int]:
        out: list[int] = []
        for h in self.hunks:
            out.extend(h.deleted_lines())
        return out

    def added_new_lines(self) -> list[int]:
        out: list[int] = []
        for h in self.hunks:
            out.extend(h.added_lines())
        return out


@dataclass(frozen=True)
class LineOrigin:
    """Provenance of one physical line: the revision that last introduced
    or changed it."""

    path: str
    line_no: int
    origin_rev: str
    origin_date: datetime


# ----------------------------
# Text decoding
# ----------------------------


def decode_text(data: bytes, path: str) -> list[str] | None:
    """Split file bytes into lines, or None for binary / non-UTF-8 content.

    Trailing CR is stripped from every line so CRLF and LF sources diff
    identically.
    """
    if b"\x00" in data:
        logger.warning("skipping binary-looking file %s", path)
        return None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        logger.warning("skipping non-UTF-8 file %s", path)
        return None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def matches_any(path: str, patterns: Sequence[str]) -> bool:
    """fnmatch-style glob match on the full repo-relative path; `*` crosses
    directory separators, mirroring git pathspec wildcards."""
    return any(fnmatch.fnmatch(path, pat) for pat in patterns)


# ----------------------------
# Snapshot-directory backend
# ----------------------------


def _parse_manifest(path: Path) -> tuple[str, datetime, str]:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    fields: dict[str, str] = {}
    for line in raw.splitlines():
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed manifest line in {path}: {line!r}")
        key, value = line.split("=", 1)
        fields[key] = value
    for key in ("id", "timestamp", "message"):
        if key not in fields:
            raise ConfigError(f"manifest {path} is missing '{key}='")
    ts = parse_utc_timestamp(fields["timestamp"], where=str(path))
    return fields["id"], ts, fields["message"]


def parse_utc_timestamp(text: str, where: str = "") -> datetime:
    """Parse `YYYY-MM-DDTHH:MM:SSZ` (ISO-8601, UTC)."""
    value = text.strip()
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(value)
    except ValueError as exc:
        raise ConfigError(f"bad timestamp {text!r} in {where}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_utc_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class SnapshotBackend:
    """Reads the snapshot fixture format: `rev-0000/`, `rev-0001/`, ... each
    with `manifest.txt` and a `files/` subtree."""

    kind = "snapshots"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise ConfigError(f"snapshot root {self.root} is not a directory")
        entries = []
        for child in sorted(self.root.iterdir()):
            m = _REV_DIR_RE.match(child.name)
            if not m:
                continue
            entries.append((int(m.group(1)), child))
        if not entries:
            raise ConfigError(f"{self.root} contains no rev-NNNN directories")
        expected = list(range(len(entries)))
        if [n for n, _ in entries] != expected:
            raise ConfigError(f"{self.root}: rev-NNNN directories are not dense from 0")
        self._dirs: list[Path] = [d for _, d in entries]
        self._meta: list[tuple[str, datetime, str]] = []
        prev_ts = None
        for d in self._dirs:
            rid, ts, msg = _parse_manifest(d / MANIFEST_NAME)
            if prev_ts is not None and ts < prev_ts:
                raise ConfigError(
                    f"{self.root}: timestamps decrease at {d.name} ({ts} < {prev_ts})"
                )
            prev_ts = ts
            self._meta.append((rid, ts, msg))
        self._by_id = {rid: i for i, (rid, _, _) in enumerate(self._meta)}
        if len(self._by_id) != len(self._meta):
            raise ConfigError(f"{self.root}: duplicate revision ids in manifests")

    def _position(self, rev_id: str) -> int:
        if rev_id not in self._by_id:
            raise RevisionNotFoundError(f"revision {rev_id!r} not found in {self.root}")
        return self._by_id[rev_id]

    def raw_files(self, rev_id: str, patterns: Sequence[str]) -> list[tuple[str, bytes]]:
        """Matching files at a fixture revision as (relpath, bytes), sorted."""
        files_dir = self._dirs[self._position(rev_id)] / "files"
        out: list[tuple[str, bytes]] = []
        if files_dir.is_dir():
            for p in sorted(files_dir.rglob("*")):
                if not p.is_file():
                    continue
                rel = p.relative_to(files_dir).as_posix()
                if matches_any(rel, patterns):
                    out.append((rel, p.read_bytes()))
        return out

    def list_revisions(self, patterns: Sequence[str]) -> list[Revision]:
        revisions: list[Revision] = []
        prev_digests: dict[str, str] = {}
        for i, (rid, ts, msg) in enumerate(self._meta):
            digests = {
                rel: hashlib.sha1(data).hexdigest()
                for rel, data in self.raw_files(rid, patterns)
            }
            if digests != prev_digests:
                revisions.append(Revision(rid, ts, msg, len(revisions)))
            prev_digests = digests
        return revisions

    def read_snapshot(self, rev: Revision, patterns: Sequence[str]) -> list[FileSnapshot]:
        out = []
        for rel, data in self.raw_files(rev.id, patterns):
            lines = decode_text(data, rel)
            if lines is None:
                continue
            out.append(FileSnapshot(rel, tuple(lines)))
        return out

    def compute_blame(self, rev: Revision, path: str) -> list[LineOrigin]:
        """Forward-propagate line identity through the diffs of `path`.

        Lines matched by the LCS keep their origin; inserted lines take the
        inserting revision. Deleting and re-adding a file restarts its
        provenance.
        """
        target = self._position(rev.id)
        origins: list[tuple[str, datetime]] | None = None
        prev_lines: list[str] | None = None
        for i in range(target + 1):
            rid, ts, _ = self._meta[i]
            data = dict(self.raw_files(rid, [path])).get(path)
            lines = decode_text(data, path) if data is not None else None
            if lines is None:
                origins = None
                prev_lines = None
                continue
            if prev_lines is None:
                origins = [(rid, ts)] * len(lines)
            elif lines != prev_lines:
                script = diff_files(
                    FileSnapshot(path, tuple(prev_lines)), FileSnapshot(path, tuple(lines))
                )
                origins = advance_origins(origins, script, (rid, ts))
            prev_lines = lines
        if origins is None:
            raise PathNotFoundError(f"{path} does not exist at revision {rev.id}")
        return [
            LineOrigin(path, i + 1, rid, ts) for i, (rid, ts) in enumerate(origins)
        ]


# ----------------------------
# Git backend
# ----------------------------


class GitBackend:
    """Drives a real git repository through the git executable, linearized
    along the first-parent chain."""

    kind = "git"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise ConfigError(f"git repository {self.root} is not a directory")
        proc = self._git("rev-parse", "--git-dir", check=False)
        if proc.returncode != 0:
            raise ConfigError(
                f"{self.root} is not a git repository: {proc.stderr.decode(errors='replace').strip()}"
            )

    def _git(self, *args: str, check: bool = True) -> subprocess.CompletedProcess:
        proc = subprocess.run(
            ["git", "-C", str(self.root), *args], capture_output=True
        )
        if check and proc.returncode != 0:
            raise ConfigError(
                f"git {' '.join(args)} failed: {proc.stderr.decode(errors='replace').strip()}"
            )
        return proc

    def list_revisions(self, patterns: Sequence[str]) -> list[Revision]:
        proc = self._git(
            "log",
            "--first-parent",
            "--reverse",
            "--format=%H%x09%ct%x09%s",
            "--",
            *patterns,
        )
        revisions: list[Revision] = []
        for line in proc.stdout.decode("utf-8", errors="replace").splitlines():
            if not line.strip():
                continue
            # %H<TAB>%ct<TAB>%s: split into exactly three fields.
            parts = line.split("\t", 2)
            sha, epoch = parts[0], parts[1]
            subject = parts[2] if len(parts) > 2 else ""
            ts = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
            revisions.append(Revision(sha, ts, subject, len(revisions)))
        return revisions

    def _ls_files(self, rev_id: str, patterns: Sequence[str]) -> list[str]:
        proc = self._git("ls-tree", "-r", "--name-only", rev_id, check=False)
        if proc.returncode != 0:
            raise RevisionNotFoundError(
                f"revision {rev_id!r} not found in {self.root}"
            )
        names = proc.stdout.decode("utf-8", errors="replace").splitlines()
        return sorted(n for n in names if matches_any(n, patterns))

    def read_snapshot(self, rev: Revision, patterns: Sequence[str]) -> list[FileSnapshot]:
        out = []
        for rel in self._ls_files(rev.id, patterns):
            proc = self._git("show", f"{rev.id}:{rel}")
            lines = decode_text(proc.stdout, rel)
            if lines is None:
                continue
            out.append(FileSnapshot(rel, tuple(lines)))
        return out

    def compute_blame(self, rev: Revision, path: str) -> list[LineOrigin]:
        proc = self._git(
            "blame", "--first-parent", "--line-porcelain", rev.id, "--", path,
            check=False,
        )
        if proc.returncode != 0:
            stderr = proc.stderr.decode(errors="replace").strip()
            raise PathNotFoundError(
                f"git blame failed for {path} at {rev.id}: {stderr}"
            )
        return _parse_line_porcelain(proc.stdout.decode("utf-8", errors="replace"), path)


def _parse_line_porcelain(text: str, path: str) -> list[LineOrigin]:
    """Parse `git blame --line-porcelain` output.

    Every line group starts with `<sha> <orig> <final> [<count>]`, carries
    `committer-time <epoch>` metadata (at least on the commit's first
    occurrence) and ends with the tab-prefixed content line.
    """
    origins: list[LineOrigin] = []
    commit_times: dict[str, int] = {}
    cur_sha: str | None = None
    cur_final = 0
    for line in text.split("\n"):
        if line.startswith("\t"):
            if cur_sha is None:
                continue
            ts = datetime.fromtimestamp(commit_times[cur_sha], tz=timezone.utc)
            origins.append(LineOrigin(path, cur_final, cur_sha, ts))
            cur_sha = None
            continue
        if cur_sha is None:
            parts = line.split()
            if len(parts) >= 3 and re.fullmatch(r"[0-9a-f]{40}", parts[0]):
                cur_sha = parts[0]
                cur_final = int(parts[2])
            continue
        if line.startswith("committer-time "):
            commit_times[cur_sha] = int(line.split(" ", 1)[1])
    origins.sort(key=lambda o: o.line_no)
    return origins


Backend = SnapshotBackend | GitBackend


def open_backend(kind: str, path: str | Path) -> Backend:
    if kind == "git":
        return GitBackend(path)
    if kind == "snapshots":
        return SnapshotBackend(path)
    if kind == "auto":
        if (Path(path) / "rev-0000").is_dir():
            return SnapshotBackend(path)
        return GitBackend(path)
    raise ConfigError(f"unknown backend kind {kind!r}")


# ----------------------------
# Operations
# ----------------------------


def list_revisions(backend: Backend, patterns: Sequence[str]) -> list[Revision]:
    """All relevant revisions (those changing >= 1 filtered file), with
    dense ordinals assigned after filtering."""
    if not patterns:
        raise ConfigError("path filter must not be empty")
    revisions = backend.list_revisions(patterns)
    if not revisions:
        raise EmptyHistoryError(
            f"no revision changes any file matching {list(patterns)}"
        )
    return revisions


def read_snapshot(backend: Backend, rev: Revision, patterns: Sequence[str]) -> list[FileSnapshot]:
    """Exact contents of matching files at `rev`, sorted by path. Binary and
    non-UTF-8 files are skipped with a warning."""
    return backend.read_snapshot(rev, patterns)


def compute_blame(backend: Backend, rev: Revision, path: str) -> list[LineOrigin]:
    """One LineOrigin per physical line of `path` at `rev`."""
    return backend.compute_blame(rev, path)


def diff_files(old: FileSnapshot | None, new: FileSnapshot | None) -> DiffScript:
    """Minimal line-based edit script turning `old` into `new`.

    Either side may be None or empty, modeling whole-file addition or
    deletion.
    """
    old_lines = list(old.lines) if old is not None else []
    new_lines = list(new.lines) if new is not None else []
    matches = lcs_matches(old_lines, new_lines)
    matches.append((len(old_lines), len(new_lines)))
    hunks: list[Hunk] = []
    pi = pj = -1
    for mi, mj in matches:
        if mi - pi > 1 or mj - pj > 1:
            hunks.append(Hunk(pi + 2, mi - pi - 1, pj + 2, mj - pj - 1))
        pi, pj = mi, mj
    return DiffScript(
        old.path if old is not None else None,
        new.path if new is not None else None,
        tuple(hunks),
    )


def apply_diff(old_lines: Sequence[str], script: DiffScript, new_lines_source: Sequence[str]) -> list[str]:
    """Replay `script` on `old_lines`, taking inserted text from
    `new_lines_source` (the new side the script was computed against)."""
    out: list[str] = []
    cursor = 1
    for h in script.hunks:
        out.extend(old_lines[cursor - 1 : h.old_start - 1])
        out.extend(new_lines_source[h.new_start - 1 : h.new_start - 1 + h.new_count])
        cursor = h.old_start + h.old_count
    out.extend(old_lines[cursor - 1 :])
    return out


def advance_origins(origins: Sequence, script: DiffScript, new_value) -> list:
    """Carry per-line origin values across one diff: kept lines keep their
    value, inserted lines get `new_value`."""
    out: list = []
    cursor = 1
    for h in script.hunks:
        out.extend(origins[cursor - 1 : h.old_start - 1])
        out.extend([new_value] * h.new_count)
        cursor = h.old_start + h.old_count
    out.extend(origins[cursor - 1 :])
    return out


def revisions_by_id(revisions: Iterable[Revision]) -> dict[str, Revision]:
    return {r.id: r for r in revisions}
