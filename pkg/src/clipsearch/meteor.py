"""METEOR scoring for query-against-caption matching.

The score combines unigram precision and recall (recall-weighted harmonic
mean) with a fragmentation penalty, over a one-to-one token alignment:

    precision = matches / |hyp|
    recall    = matches / |ref|
    fmean     = 10 * P * R / (R + 9 * P)
    penalty   = 0.5 * (chunks / matches) ** 3
    score     = fmean * (1 - penalty)

Alignment selection is exact about ties: among maximum-cardinality
alignments it returns one with the fewest chunks, breaking remaining ties by
the lexicographically smallest pair list. Matching stages are prioritized
exact > stem > synonym; stemming and synonyms are disabled by default.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

from .errors import InvalidInputError

STAGE_EXACT = "exact"
STAGE_STEM = "stem"
STAGE_SYNONYM = "synonym"

# Exhaustive chunk-minimizing search gives up past this many explored nodes
# and falls back to a greedy alignment flagged as approximate.
SEARCH_NODE_BUDGET = 10**6

_PUNCT = string.punctuation
_EMPTY: frozenset[str] = frozenset()


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace, stripping edge punctuation.

    Internal punctuation survives ("top-3" stays one token); tokens that are
    all punctuation are dropped.
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


def suffix_stem(token: str) -> str:
    """Strip the longest of -ing/-es/-ed/-s leaving at least 2 characters."""
    for suffix in ("ing", "es", "ed", "s"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 2:
            return token[: -len(suffix)]
    return token


def load_synonyms(path: str) -> dict[str, frozenset[str]]:
    """Load a synonym table from UTF-8 lines of ``word<TAB>syn1,syn2,...``."""
    table: dict[str, frozenset[str]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            word, sep, rest = line.partition("\t")
            if not sep or not word.strip():
                raise InvalidInputError(f"{path}:{lineno}: expected 'word<TAB>syn1,syn2,...'")
            syns = frozenset(s.strip().lower() for s in rest.split(",") if s.strip())
            table[word.strip().lower()] = syns
    return table


@dataclass(frozen=True)
class MatcherConfig:
    """Optional matching stages beyond exact token equality.

    The synonym relation is used exactly as loaded (checked in both
    directions, no transitive closure).
    """

    stemmer: Callable[[str], str] | None = None
    synonyms: Mapping[str, frozenset[str]] | None = None


DEFAULT_CONFIG = MatcherConfig()


class AlignedPair(NamedTuple):
    hyp_index: int
    ref_index: int
    stage: str


@dataclass
class Alignment:
    """One-to-one token alignment, pairs sorted by hypothesis index.

    ``approx`` is set when the chunk-minimizing search exceeded its node
    budget and a greedy alignment was returned instead.
    """

    pairs: list[AlignedPair] = field(default_factory=list)
    approx: bool = False


@dataclass(frozen=True)
class ScoreBreakdown:
    """METEOR components for one hypothesis/reference pair."""

    matches: int = 0
    precision: float = 0.0
    recall: float = 0.0
    fmean: float = 0.0
    chunks: int = 0
    penalty: float = 0.0
    score: float = 0.0
    approx: bool = False


class _BudgetExceeded(Exception):
    pass


def _match_stage(hyp_tok: str, ref_tok: str, config: MatcherConfig) -> str | None:
    # Highest-priority stage that relates the two tokens, or None.
    if hyp_tok == ref_tok:
        return STAGE_EXACT
    if config.stemmer is not None and config.stemmer(hyp_tok) == config.stemmer(ref_tok):
        return STAGE_STEM
    syn = config.synonyms
    if syn is not None and (ref_tok in syn.get(hyp_tok, _EMPTY) or hyp_tok in syn.get(ref_tok, _EMPTY)):
        return STAGE_SYNONYM
    return None


def count_chunks(alignment: Alignment) -> int:
    """Number of maximal pair runs consecutive in both hyp and ref order."""
    return _count_chunks_indexed([(p.hyp_index, p.ref_index) for p in alignment.pairs])


def _count_chunks_indexed(pairs: list[tuple[int, int]]) -> int:
    if not pairs:
        return 0
    chunks = 1
    prev_h, prev_r = pairs[0]
    for h, r in pairs[1:]:
        if h != prev_h + 1 or r != prev_r + 1:
            chunks += 1
        prev_h, prev_r = h, r
    return chunks


def align(hyp: list[str], ref: list[str], config: MatcherConfig = DEFAULT_CONFIG) -> Alignment:
    """Best one-to-one alignment between hypothesis and reference tokens.

    Selection order: maximum cardinality, then minimum chunk count, then the
    lexicographically smallest pair list by (hyp_index, ref_index). Each pair
    carries the highest-priority stage (exact > stem > synonym) under which
    its tokens match.

    Tokens with a mutually unique counterpart are fixed up front (they occur
    in every maximum alignment); the remaining ambiguity is resolved by
    budgeted backtracking, with a greedy leftmost fallback past the budget.
    """
    candidates: dict[int, list[tuple[int, str]]] = {}
    for i, h in enumerate(hyp):
        row = []
        for j, r in enumerate(ref):
            stage = _match_stage(h, r, config)
            if stage is not None:
                row.append((j, stage))
        if row:
            candidates[i] = row

    forced, open_hyp, open_ref = _fix_forced_pairs(candidates)

    ambiguous = sorted(i for i in candidates if i in open_hyp)
    if not ambiguous:
        return Alignment(pairs=sorted(forced))

    try:
        pairs = _search_min_chunks(forced, ambiguous, candidates, open_ref)
        return Alignment(pairs=pairs)
    except _BudgetExceeded:
        pairs = list(forced)
        taken = {p.ref_index for p in pairs}
        for i in ambiguous:
            for j, stage in candidates[i]:
                if j not in taken:
                    taken.add(j)
                    pairs.append(AlignedPair(i, j, stage))
                    break
        return Alignment(pairs=sorted(pairs), approx=True)


def _fix_forced_pairs(
    candidates: dict[int, list[tuple[int, str]]],
) -> tuple[list[AlignedPair], set[int], set[int]]:
    # Repeatedly fix pairs (i, j) where i's only open candidate is j and
    # vice versa; such pairs belong to every maximum-cardinality matching.
    hyp_open: dict[int, set[int]] = {i: {j for j, _ in row} for i, row in candidates.items()}
    ref_open: dict[int, set[int]] = {}
    for i, row in candidates.items():
        for j, _ in row:
            ref_open.setdefault(j, set()).add(i)

    stage_of = {(i, j): stage for i, row in candidates.items() for j, stage in row}
    forced: list[AlignedPair] = []
    changed = True
    while changed:
        changed = False
        for i in list(hyp_open):
            js = hyp_open[i]
            if len(js) != 1:
                continue
            j = next(iter(js))
            if len(ref_open[j]) != 1:
                continue
            forced.append(AlignedPair(i, j, stage_of[i, j]))
            del hyp_open[i]
            del ref_open[j]
            for i2 in list(hyp_open):
                hyp_open[i2].discard(j)
                if not hyp_open[i2]:
                    del hyp_open[i2]
            for j2 in list(ref_open):
                ref_open[j2].discard(i)
                if not ref_open[j2]:
                    del ref_open[j2]
            changed = True
    return forced, set(hyp_open), set(ref_open)


def _search_min_chunks(
    forced: list[AlignedPair],
    ambiguous: list[int],
    candidates: dict[int, list[tuple[int, str]]],
    open_ref: set[int],
) -> list[AlignedPair]:
    # Backtracking over the ambiguous hypothesis tokens. Best alignment is
    # tracked as (-cardinality, chunks, pair index list) so tuple comparison
    # implements the full selection order.
    best: list | None = None
    best_pairs: list[AlignedPair] | None = None
    nodes = 0
    available = set(open_ref)
    chosen: list[AlignedPair] = []

    def leaf() -> None:
        nonlocal best, best_pairs
        pairs = sorted(forced + chosen)
        indexed = [(p.hyp_index, p.ref_index) for p in pairs]
        key = [-len(pairs), _count_chunks_indexed(indexed), indexed]
        if best is None or key < best:
            best = key
            best_pairs = pairs

    def rec(pos: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > SEARCH_NODE_BUDGET:
            raise _BudgetExceeded
        if pos == len(ambiguous):
            leaf()
            return
        if best is not None:
            optimistic = len(forced) + len(chosen) + min(len(ambiguous) - pos, len(available))
            if optimistic < -best[0]:
                return
        i = ambiguous[pos]
        for j, stage in candidates[i]:
            if j in available:
                available.discard(j)
                chosen.append(AlignedPair(i, j, stage))
                rec(pos + 1)
                chosen.pop()
                available.add(j)
        rec(pos + 1)  # leave token i unmatched

    rec(0)
    assert best_pairs is not None
    return best_pairs


def meteor_score(
    hyp: list[str], ref: list[str], config: MatcherConfig = DEFAULT_CONFIG
) -> ScoreBreakdown:
    """Score a tokenized hypothesis against a tokenized reference.

    No matches (or an empty side) yields the all-zero breakdown.
    """
    if not hyp or not ref:
        return ScoreBreakdown()
    alignment = align(hyp, ref, config)
    m = len(alignment.pairs)
    if m == 0:
        return ScoreBreakdown(approx=alignment.approx)
    precision = m / len(hyp)
    recall = m / len(ref)
    fmean = 10 * precision * recall / (recall + 9 * precision)
    chunks = count_chunks(alignment)
    penalty = 0.5 * (chunks / m) ** 3
    return ScoreBreakdown(
        matches=m,
        precision=precision,
        recall=recall,
        fmean=fmean,
        chunks=chunks,
        penalty=penalty,
        score=fmean * (1 - penalty),
        approx=alignment.approx,
    )
