"""Greedy subword vocabulary learning and longest-match tokenization.

The trainer repeatedly merges the most frequent adjacent unit pair
(lexicographic tie-break) until the target size is reached or no pair
occurs at least twice.  Tokenization segments each whitespace word by
longest-match-first against the learned unit set, falling back to [UNK]
for characters never seen at learn time.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
MARKER_PATH, MARKER_RAD, MARKER_OP = "[PATH]", "[RAD]", "[OP]"
SPECIALS = (PAD, UNK, CLS, SEP, MASK, MARKER_PATH, MARKER_RAD, MARKER_OP)

VOCAB_FORMAT = 1


class VocabError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    id: int
    start: int
    end: int


class Vocab:
    """Ordered subword units; special tokens occupy the lowest ids."""

    def __init__(self, units: list[str], merges: list[tuple[str, str]]):
        if list(units[: len(SPECIALS)]) != list(SPECIALS):
            raise VocabError("special tokens must occupy the lowest ids")
        self.units = list(units)
        self.merges = [tuple(m) for m in merges]
        self.unit_to_id = {u: i for i, u in enumerate(self.units)}
        if len(self.unit_to_id) != len(self.units):
            raise VocabError("duplicate units")
        self.merge_ranks = {m: r for r, m in enumerate(self.merges)}
        self._max_len = max((len(u) for u in self.units[len(SPECIALS):]), default=1)

    def __len__(self):
        return len(self.units)

    @property
    def pad_id(self):
        return self.unit_to_id[PAD]

    @property
    def unk_id(self):
        return self.unit_to_id[UNK]

    @property
    def cls_id(self):
        return self.unit_to_id[CLS]

    @property
    def sep_id(self):
        return self.unit_to_id[SEP]

    @property
    def mask_id(self):
        return self.unit_to_id[MASK]

    def marker_id(self, kind: str) -> int:
        return self.unit_to_id[{"Pathology": MARKER_PATH, "Radiology": MARKER_RAD,
                                "Operative": MARKER_OP}[kind]]

    def is_special(self, token_id: int) -> bool:
        return token_id < len(SPECIALS)

    def unit(self, token_id: int) -> str:
        return self.units[token_id]

    # serialization -------------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "format": VOCAB_FORMAT,
            "specials": list(SPECIALS),
            "units": self.units,
            "merges": [list(m) for m in self.merges],
        }
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, raw: str) -> "Vocab":
        payload = json.loads(raw)
        if payload.get("format") != VOCAB_FORMAT:
            raise VocabError(f"unsupported vocab format {payload.get('format')}")
        return cls(payload["units"], [tuple(m) for m in payload["merges"]])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def learn_vocab(texts, target_size: int) -> Vocab:
    """Greedy pair-merge subword learning over normalized texts."""
    words = Counter()
    for text in texts:
        words.update(text.split())
    chars = sorted({c for w in words for c in w})
    base = len(SPECIALS) + len(chars)
    if target_size < base:
        raise VocabError(
            f"target_size {target_size} is below the {base} required for "
            f"{len(SPECIALS)} special tokens plus {len(chars)} characters")

    # each distinct word is a mutable symbol sequence with a frequency
    seqs = [list(w) for w in words]
    freqs = list(words.values())
    pair_counts: Counter = Counter()
    pair_words: dict[tuple[str, str], set[int]] = {}
    for wi, (seq, f) in enumerate(zip(seqs, freqs)):
        for a, b in zip(seq, seq[1:]):
            pair_counts[(a, b)] += f
            pair_words.setdefault((a, b), set()).add(wi)

    merges: list[tuple[str, str]] = []
    n_units = base
    while n_units < target_size:
        best = None
        best_count = 1
        for pair, count in pair_counts.items():
            if count > best_count or (count == best_count and best is not None and pair < best):
                best, best_count = pair, count
        if best is None:
            break
        merged = best[0] + best[1]
        for wi in list(pair_words.get(best, ())):
            seq, f = seqs[wi], freqs[wi]
            for a, b in zip(seq, seq[1:]):
                pair_counts[(a, b)] -= f
                if pair_counts[(a, b)] <= 0:
                    del pair_counts[(a, b)]
                ws = pair_words.get((a, b))
                if ws is not None:
                    ws.discard(wi)
                    if not ws:
                        del pair_words[(a, b)]
            out = []
            j = 0
            while j < len(seq):
                if j + 1 < len(seq) and seq[j] == best[0] and seq[j + 1] == best[1]:
                    out.append(merged)
                    j += 2
                else:
                    out.append(seq[j])
                    j += 1
            seqs[wi] = out
            for a, b in zip(out, out[1:]):
                pair_counts[(a, b)] += f
                pair_words.setdefault((a, b), set()).add(wi)
        merges.append(best)
        n_units += 1

    units = list(SPECIALS) + chars + [a + b for a, b in merges]
    return Vocab(units, merges)


def tokenize(vocab: Vocab, text: str) -> list[Token]:
    """Longest-match-first segmentation of normalized text.

    Offsets index into ``text``; unknown characters each yield one [UNK].
    """
    tokens: list[Token] = []
    pos = 0
    n = len(text)
    lookup = vocab.unit_to_id
    max_len = vocab._max_len
    while pos < n:
        if text[pos] == " ":
            pos += 1
            continue
        word_end = text.find(" ", pos)
        if word_end == -1:
            word_end = n
        i = pos
        while i < word_end:
            limit = min(max_len, word_end - i)
            tid = None
            for length in range(limit, 0, -1):
                cand = lookup.get(text[i:i + length])
                if cand is not None:
                    tid = cand
                    tokens.append(Token(tid, i, i + length))
                    i += length
                    break
            if tid is None:
                tokens.append(Token(vocab.unk_id, i, i + 1))
                i += 1
        pos = word_end
    return tokens


def decode(vocab: Vocab, tokens: list[Token]) -> str:
    """Rebuild normalized text from tokens via their recorded offsets."""
    parts: list[str] = []
    prev_end = None
    for tok in tokens:
        if prev_end is not None and tok.start > prev_end:
            parts.append(" ")
        parts.append(vocab.unit(tok.id))
        prev_end = tok.end
    return "".join(parts)
