"""Normalization, sentence splitting, subword vocabulary, and input assembly."""

from .normalize import NormalizedText, SentenceSpan, normalize, split_sentences, ABBREVIATIONS
from .vocab import (
    CLS, MARKER_OP, MARKER_PATH, MARKER_RAD, MASK, PAD, SEP, SPECIALS, UNK,
    Token, Vocab, VocabError, decode, learn_vocab, tokenize,
)
from .assemble import (
    MAX_SENTENCES, MAX_SENTENCE_TOKENS, EmptyWindowError, SentenceSegment,
    TokenSequence, assemble_input,
)

__all__ = [
    "NormalizedText", "SentenceSpan", "normalize", "split_sentences", "ABBREVIATIONS",
    "CLS", "MARKER_OP", "MARKER_PATH", "MARKER_RAD", "MASK", "PAD", "SEP",
    "SPECIALS", "UNK", "Token", "Vocab", "VocabError", "decode", "learn_vocab",
    "tokenize", "MAX_SENTENCES", "MAX_SENTENCE_TOKENS", "EmptyWindowError",
    "SentenceSegment", "TokenSequence", "assemble_input",
]
