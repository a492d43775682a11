"""Per-candidate features for the ranking model.

Three groups, mirroring how the ranker consumes them: string comparisons
between the query and each candidate's gazetteer names, coherence features
computed from the other place names mentioned in the same document, and the
context vectors the ranker compares against its country / feature-type
embeddings.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Protocol, Sequence

import numpy as np

from placelink.gazetteer import AdminTables, GazetteerEntry, normalize_name

if TYPE_CHECKING:
    from placelink.index import CandidateSet

_WORD_RE = re.compile(r"\w+", re.UNICODE)
_SPAN_NGRAM_SIZE = 4


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance (insert/delete/substitute)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def bounded_edit_distance(a: str, b: str, bound: int) -> int | None:
    """Levenshtein distance if it is <= bound, else None.

    Only cells within `bound` of the diagonal can matter, so each row is
    restricted to that band and the scan bails out once the whole band
    exceeds the bound.
    """
    if abs(len(a) - len(b)) > bound:
        return None
    if a == b:
        return 0
    if bound == 0:
        return None
    if len(a) < len(b):
        a, b = b, a
    la, lb = len(a), len(b)
    inf = bound + 1
    previous = list(range(lb + 1))
    for i in range(1, la + 1):
        lo = max(1, i - bound)
        hi = min(lb, i + bound)
        current = [inf] * (lb + 1)
        if lo == 1:
            current[0] = i
        ca = a[i - 1]
        row_min = current[0] if lo == 1 else inf
        for j in range(lo, hi + 1):
            cost = 0 if ca == b[j - 1] else 1
            value = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            current[j] = value
            if value < row_min:
                row_min = value
        if row_min > bound:
            return None
        previous = current
    return previous[lb] if previous[lb] <= bound else None


@dataclass(frozen=True)
class CandidateFeatures:
    """Numeric features for one candidate of one toponym.

    Edit distances are length-normalized to [0, 1]; population and
    alternative-name counts are log10(x + 1) of heavy-tailed raw values.
    """

    min_edit_distance: float
    avg_edit_distance: float
    exact_match_flag: int
    alt_name_count_log: float
    population_log: float
    is_adm1_of_other_toponym: int
    has_adm1_parent_in_doc: int
    shared_country_fraction: float
    candidate_country: str
    candidate_feature_class: str


@dataclass
class ContextVectors:
    """Context embeddings for one toponym: its own mention, the average of
    the other mentions (zero vector when there are none), and the document."""

    mention_vector: np.ndarray
    other_mentions_vector: np.ndarray
    document_vector: np.ndarray

    def __post_init__(self) -> None:
        dims = {v.shape for v in (self.mention_vector, self.other_mentions_vector, self.document_vector)}
        if len(dims) != 1 or len(next(iter(dims))) != 1:
            raise ValueError(f"context vectors must share one 1-D shape, got {dims}")
        for v in (self.mention_vector, self.other_mentions_vector, self.document_vector):
            if not np.all(np.isfinite(v)):
                raise ValueError("context vectors must be finite")

    @property
    def dimension(self) -> int:
        return self.mention_vector.shape[0]


class EmbeddingProvider(Protocol):
    """Source of context vectors; deterministic for fixed input, fixed
    output dimension. The default is a hashed bag of words; transformer
    embeddings can be mounted behind the same interface."""

    dimension: int

    def embed_span(self, text: str, span: tuple[int, int]) -> np.ndarray: ...

    def embed_document(self, text: str) -> np.ndarray: ...


class HashedBowProvider:
    """Seeded hashing bag-of-words provider.

    Document vectors hash lowercased word tokens; span vectors additionally
    hash character 4-grams of the mention surface. Vectors are L2-normalized
    counts (the zero vector for empty input).
    """

    def __init__(self, dimension: int, seed: int):
        if dimension < 16:
            raise ValueError(f"provider dimension must be >= 16, got {dimension}")
        self.dimension = dimension
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=True)

    def _slot(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), key=self._key, digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dimension

    def _vector(self, tokens: Iterable[str]) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in tokens:
            vec[self._slot(token)] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0.0:
            vec /= norm
        return vec

    def embed_document(self, text: str) -> np.ndarray:
        return self._vector(_WORD_RE.findall(text.casefold()))

    def embed_span(self, text: str, span: tuple[int, int]) -> np.ndarray:
        start, end = span
        surface = text[start:end].casefold()
        tokens = _WORD_RE.findall(surface)
        n = _SPAN_NGRAM_SIZE
        if len(surface) >= n:
            tokens.extend(surface[i : i + n] for i in range(len(surface) - n + 1))
        return self._vector(tokens)


def hashed_bow_provider(dimension: int, seed: int) -> HashedBowProvider:
    """Default context provider: deterministic, dependency-free."""
    return HashedBowProvider(dimension, seed)


def string_features(query: str, candidate: GazetteerEntry) -> tuple[float, float, int]:
    """(min, avg) length-normalized edit distance from the normalized query
    to the candidate's name set, plus the exact-match flag.

    The name set is the primary name, the ascii name, and the alternative
    names, normalized and deduplicated. Each distance is divided by
    max(len(query), len(name)) before aggregation.
    """
    names: dict[str, None] = {}
    for raw in (candidate.name, candidate.ascii_name, *candidate.alternative_names):
        norm = normalize_name(raw)
        if norm:
            names.setdefault(norm)
    if not names:
        return 1.0, 1.0, 0
    exact = 0
    normalized_distances = []
    for name in names:
        if name == query:
            exact = 1
            normalized_distances.append(0.0)
            continue
        longest = max(len(query), len(name))
        if longest == 0:
            normalized_distances.append(0.0)
            continue
        normalized_distances.append(edit_distance(query, name) / longest)
    return min(normalized_distances), sum(normalized_distances) / len(normalized_distances), exact


@dataclass(frozen=True)
class CandidateSummary:
    """Per-toponym digest of a candidate set, precomputed so coherence checks
    are O(1) per candidate."""

    ids: frozenset[int]
    countries: frozenset[str]
    admin_pair_ids: dict[tuple[str, str], tuple[int, ...]]


def summarize_candidates(candidate_set: "CandidateSet") -> CandidateSummary:
    ids = set()
    countries = set()
    pair_ids: dict[tuple[str, str], list[int]] = {}
    for entry, _ in candidate_set.candidates:
        ids.add(entry.geoname_id)
        if entry.country_code:
            countries.add(entry.country_code)
            if entry.admin1_code:
                pair_ids.setdefault((entry.country_code, entry.admin1_code), []).append(
                    entry.geoname_id
                )
    return CandidateSummary(
        ids=frozenset(ids),
        countries=frozenset(countries),
        admin_pair_ids={k: tuple(v) for k, v in pair_ids.items()},
    )


def coherence_from_summaries(
    candidate: GazetteerEntry,
    other_summaries: Sequence[CandidateSummary],
    admin_tables: AdminTables,
) -> tuple[int, int, float]:
    """(is_adm1_of_other, has_adm1_parent, shared_country_fraction) computed
    against the other toponyms' candidate sets. Never reads gold labels."""
    if not other_summaries:
        return 0, 0, 0.0

    has_parent = 0
    parent_id = admin_tables.adm1_id(candidate.country_code, candidate.admin1_code)
    if parent_id is not None:
        has_parent = int(any(parent_id in summary.ids for summary in other_summaries))

    is_adm1_of_other = 0
    if candidate.feature_code == "ADM1" and candidate.country_code and candidate.admin1_code:
        key = (candidate.country_code, candidate.admin1_code)
        for summary in other_summaries:
            inside = summary.admin_pair_ids.get(key)
            # containment is proper: the ADM1 entry itself does not count
            if inside and any(gid != candidate.geoname_id for gid in inside):
                is_adm1_of_other = 1
                break

    shared = 0.0
    if candidate.country_code:
        matching = sum(1 for s in other_summaries if candidate.country_code in s.countries)
        shared = matching / len(other_summaries)
    return is_adm1_of_other, has_parent, shared


def coherence_features(
    candidate: GazetteerEntry,
    other_candidate_sets: Sequence["CandidateSet"],
    admin_tables: AdminTables,
) -> tuple[int, int, float]:
    """Coherence flags from raw candidate sets (excluding the toponym being
    scored). Order of the other sets does not matter."""
    summaries = [summarize_candidates(cs) for cs in other_candidate_sets]
    return coherence_from_summaries(candidate, summaries, admin_tables)


def candidate_features(
    normalized_query: str,
    candidate: GazetteerEntry,
    other_summaries: Sequence[CandidateSummary],
    admin_tables: AdminTables,
) -> CandidateFeatures:
    """Assemble the full feature record for one candidate."""
    min_edit, avg_edit, exact = string_features(normalized_query, candidate)
    is_adm1, has_parent, shared = coherence_from_summaries(candidate, other_summaries, admin_tables)
    return CandidateFeatures(
        min_edit_distance=min_edit,
        avg_edit_distance=avg_edit,
        exact_match_flag=exact,
        alt_name_count_log=math.log10(len(candidate.alternative_names) + 1),
        population_log=math.log10(candidate.population + 1),
        is_adm1_of_other_toponym=is_adm1,
        has_adm1_parent_in_doc=has_parent,
        shared_country_fraction=shared,
        candidate_country=candidate.country_code,
        candidate_feature_class=candidate.feature_class,
    )
