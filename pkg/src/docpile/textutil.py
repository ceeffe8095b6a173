"""Text utilities shared across the engine.

Entity normalization and sentence segmentation live here so that KG
construction, entity matching, and sentence linking all agree on the same
rules. Segmentation is deliberately rule-based: deterministic output matters
more than linguistic perfection for grounding and tests.
"""

from __future__ import annotations

from dataclasses import dataclass

# Tokens that end with a period but do not end a sentence.
ABBREVIATIONS = frozenset(
    {
        "mr.", "mrs.", "ms.", "dr.", "prof.", "rev.", "hon.", "sr.", "jr.", "st.",
        "u.s.", "u.k.", "u.n.", "e.g.", "i.e.", "etc.", "vs.", "cf.", "al.", "a.m.", "p.m.",
        "inc.", "ltd.", "co.", "corp.", "dept.", "est.", "no.", "fig.",
        "gen.", "col.", "sgt.", "capt.", "lt.", "maj.", "cmdr.", "gov.", "sen.", "rep.",
        "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.",
    }
)

_TERMINATORS = frozenset(".!?")


def normalize_entity(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace.

    This is the only identity rule for KG entities; alias resolution is
    intentionally out of scope.
    """
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class SentenceSpan:
    """A sentence located by character offsets into the original text."""

    index: int
    start: int
    end: int
    text: str


def _token_ending_at(text: str, period_pos: int) -> str:
    """The whitespace-delimited token whose last character is text[period_pos]."""
    start = period_pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : period_pos + 1]


def split_sentences(text: str) -> list[SentenceSpan]:
    """Split text into sentence spans.

    A sentence ends at '.', '!', or '?' followed by whitespace or end of
    text, except when the period closes a known abbreviation. Runs of
    terminal punctuation ("?!", "...") count as one boundary. Whitespace-only
    fragments are dropped; spans are trimmed to non-whitespace extents.
    """
    spans: list[SentenceSpan] = []
    sentence_start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS:
            # Consume the full punctuation run before deciding.
            run_end = i
            while run_end + 1 < n and text[run_end + 1] in _TERMINATORS:
                run_end += 1
            followed = run_end + 1 >= n or text[run_end + 1].isspace()
            is_abbrev = (
                ch == "."
                and run_end == i
                and _token_ending_at(text, i).lower() in ABBREVIATIONS
            )
            if followed and not is_abbrev:
                _append_span(spans, text, sentence_start, run_end + 1)
                sentence_start = run_end + 1
            i = run_end + 1
        else:
            i += 1
    _append_span(spans, text, sentence_start, n)
    return spans


def _append_span(spans: list[SentenceSpan], text: str, start: int, end: int) -> None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if end > start:
        spans.append(SentenceSpan(index=len(spans), start=start, end=end, text=text[start:end]))
