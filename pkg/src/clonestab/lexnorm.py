"""Language-light lexical front-end for C-family sources.

A single character-level sweep classifies every physical line as CODE,
COMMENT or BLANK and produces comment-stripped text for normalization.
Block extraction finds top-level function bodies by brace matching (braces
inside string/char literals and comments never count), and blind renaming
collapses identifiers and literals so Type-2/3 comparison ignores naming.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .history import FileSnapshot

logger = logging.getLogger(__name__)

CODE = "code"
COMMENT = "comment"
BLANK = "blank"

C_KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Bool _Complex _Imaginary
    """.split()
)


@dataclass(frozen=True)
class LineClasses:
    """Per-line tags for one file, plus the comment-stripped views the
    block extractor and normalizer work from."""

    path: str
    tags: tuple[str, ...]
    # Comment content blanked out, literals kept verbatim.
    code_text: tuple[str, ...]
    # Same, with literal interiors masked so brace scanning is safe.
    shielded_text: tuple[str, ...]
    preproc: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.tags)


@dataclass(frozen=True)
class Block:
    """One top-level function body.

    `start_line`/`end_line` are the physical lines of the opening and
    closing brace (inclusive); `normalized_lines` are the whitespace
    collapsed CODE lines strictly between them, and `line_map[i]` is the
    physical line of `normalized_lines[i]`.
    """

    path: str
    start_line: int
    end_line: int
    normalized_lines: tuple[str, ...]
    line_map: tuple[int, ...]


def classify_physical_lines(snapshot: FileSnapshot) -> LineClasses:
    """Tag every physical line CODE / COMMENT / BLANK.

    String and character literals shield comment markers; a line mixing
    code and comment is CODE; an unterminated block comment turns the rest
    of the file into COMMENT with a warning.
    """
    tags: list[str] = []
    code_text: list[str] = []
    shielded_text: list[str] = []
    preproc: list[bool] = []
    in_block_comment = False
    for raw in snapshot.lines:
        code_chars: list[str] = []
        shielded_chars: list[str] = []
        has_comment = False
        in_string = False
        in_char = False
        i = 0
        n = len(raw)
        while i < n:
            ch = raw[i]
            if in_block_comment:
                if ch == "*" and i + 1 < n and raw[i + 1] == "/":
                    in_block_comment = False
                    i += 2
                else:
                    i += 1
                if not ch.isspace():
                    has_comment = True
                continue
            if in_string or in_char:
                quote = '"' if in_string else "'"
                code_chars.append(ch)
                shielded_chars.append(".")
                if ch == "\\" and i + 1 < n:
                    code_chars.append(raw[i + 1])
                    shielded_chars.append(".")
                    i += 2
                    continue
                if ch == quote:
                    shielded_chars[-1] = quote
                    in_string = in_char = False
                i += 1
                continue
            if ch == "/" and i + 1 < n and raw[i + 1] == "/":
                has_comment = True
                break  # rest of line is comment
            if ch == "/" and i + 1 < n and raw[i + 1] == "*":
                in_block_comment = True
                has_comment = True
                i += 2
                continue
            if ch == '"':
                in_string = True
            elif ch == "'":
                in_char = True
            code_chars.append(ch)
            shielded_chars.append(ch)
            i += 1
        if in_string or in_char:
            # C string/char literals do not span lines; recover at EOL.
            in_string = in_char = False
        code = "".join(code_chars)
        has_code = bool(code.strip())
        if has_code:
            tags.append(CODE)
        elif has_comment:
            tags.append(COMMENT)
        else:
            tags.append(BLANK)
        code_text.append(code)
        shielded_text.append("".join(shielded_chars))
        preproc.append(has_code and code.lstrip().startswith("#"))
    if in_block_comment:
        logger.warning("unterminated block comment in %s", snapshot.path)
    return LineClasses(
        snapshot.path,
        tuple(tags),
        tuple(code_text),
        tuple(shielded_text),
        tuple(preproc),
    )


def _collapse(text: str) -> str:
    return " ".join(text.split())


def extract_blocks(snapshot: FileSnapshot, classes: LineClasses) -> list[Block]:
    """Top-level function bodies of one file.

    A body is the outermost `{...}` whose opening brace, at file scope,
    directly follows a `)`. Files with unbalanced braces contribute zero
    blocks (warning); their lines still count as non-cloned code downstream.
    Preprocessor lines neither open/close braces nor join normalized text.
    """
    depth = 0
    last_struct_char = ""
    open_pos: tuple[int, int] | None = None  # (line, col) of candidate body brace
    bodies: list[tuple[int, int]] = []
    balanced = True
    for line_no, shielded in enumerate(classes.shielded_text, start=1):
        if classes.preproc[line_no - 1]:
            continue
        for col, ch in enumerate(shielded):
            if ch == "{":
                if depth == 0 and last_struct_char == ")":
                    open_pos = (line_no, col)
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth < 0:
                    balanced = False
                    break
                if depth == 0 and open_pos is not None:
                    bodies.append((open_pos[0], line_no))
                    open_pos = None
            if not ch.isspace():
                last_struct_char = ch
        if not balanced:
            break
    if not balanced or depth != 0:
        logger.warning("unbalanced braces in %s; no blocks extracted", snapshot.path)
        return []
    blocks: list[Block] = []
    for start, end in bodies:
        normalized: list[str] = []
        line_map: list[int] = []
        for ln in range(start + 1, end):
            idx = ln - 1
            if classes.tags[idx] != CODE or classes.preproc[idx]:
                continue
            text = _collapse(classes.code_text[idx])
            if not text:
                continue
            normalized.append(text)
            line_map.append(ln)
        if not normalized:
            continue
        blocks.append(Block(snapshot.path, start, end, tuple(normalized), tuple(line_map)))
    return blocks


_TOKEN_RE = re.compile(
    r"""
    (?P<string>"(?:\\.|[^"\\])*")
  | (?P<char>'(?:\\.|[^'\\])*')
  | (?P<number>(?:0[xX][0-9a-fA-F]+|\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)[a-zA-Z_]*)
  | (?P<ident>[A-Za-z_]\w*)
    """,
    re.VERBOSE,
)


def _rename_token(m: re.Match) -> str:
    if m.group("string") is not None:
        return '"S"'
    if m.group("char") is not None:
        return "'C'"
    if m.group("number") is not None:
        return "0"
    word = m.group("ident")
    return word if word in C_KEYWORDS else "X"


def blind_rename(block: Block) -> Block:
    """Replace every identifier with `X` and every literal with `0` / `"S"`
    / `'C'`, keeping keywords, punctuation and the line map intact."""
    renamed = tuple(_TOKEN_RE.sub(_rename_token, line) for line in block.normalized_lines)
    return Block(block.path, block.start_line, block.end_line, renamed, block.line_map)
