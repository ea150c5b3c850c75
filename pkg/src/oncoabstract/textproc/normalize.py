"""Text normalization and sentence splitting with exact offset maps.

All downstream tokenization runs on normalized text; the offset map lets
every token span be traced back to the exact source characters, which the
rationale and curation layers depend on.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class NormalizedText:
    """Lowercased, whitespace-collapsed text plus a map back to the source.

    ``to_source[i]`` is the index in the original string of the character
    that produced normalized position ``i`` (for inserted single spaces it
    points at the first whitespace character of the collapsed run).
    """

    text: str
    to_source: list[int]

    def to_original(self, start: int, end: int) -> tuple[int, int]:
        """Map a half-open normalized span to original coordinates."""
        if start == end:
            pos = self.to_source[start] if start < len(self.to_source) else (
                self.to_source[-1] + 1 if self.to_source else 0)
            return pos, pos
        return self.to_source[start], self.to_source[end - 1] + 1


def normalize(text: str) -> NormalizedText:
    """Lowercase and collapse whitespace runs to single spaces.

    Lowercasing is per character; the rare characters whose lowercase form
    has a different length are kept as-is so offsets stay one-to-one.
    """
    chars: list[int] = []
    out: list[str] = []
    pending_ws: int | None = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if out and pending_ws is None:
                pending_ws = i
            continue
        if pending_ws is not None:
            out.append(" ")
            chars.append(pending_ws)
            pending_ws = None
        low = ch.lower()
        out.append(low if len(low) == 1 else ch)
        chars.append(i)
    return NormalizedText("".join(out), chars)


@dataclass(frozen=True)
class SentenceSpan:
    doc_id: str
    sentence_index: int
    char_start: int
    char_end: int


TERMINATORS = ".!?;"

# words whose trailing period does not end a sentence
ABBREVIATIONS = {
    "dr.", "mr.", "mrs.", "ms.", "st.", "no.", "vs.", "approx.",
    "e.g.", "i.e.", "etc.", "fig.",
}


def split_sentences(text: str, doc_id: str = "") -> list[SentenceSpan]:
    """Split normalized text on terminator-plus-whitespace boundaries.

    A terminator preceded by a guarded abbreviation does not split.  Spans
    are ordered, non-overlapping, and cover every non-whitespace character.
    """
    spans: list[SentenceSpan] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch in TERMINATORS and (i + 1 == n or text[i + 1] == " "):
            word_start = text.rfind(" ", start, i) + 1
            word = text[word_start:i + 1]
            if not (ch == "." and word in ABBREVIATIONS):
                spans.append(SentenceSpan(doc_id, len(spans), start, i + 1))
                i += 1
                while i < n and text[i] == " ":
                    i += 1
                start = i
                continue
        i += 1
    if start < n:
        end = n
        while end > start and text[end - 1] == " ":
            end -= 1
        if end > start:
            spans.append(SentenceSpan(doc_id, len(spans), start, end))
    return spans
