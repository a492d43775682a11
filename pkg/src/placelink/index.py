"""In-process fuzzy-search index over gazetteer names.

Retrieval works in two stages: exact lookups over every indexed name variant
(primary, ascii, alternatives, each with an ascii-folded twin), then trigram
blocking with bounded edit-distance verification for fuzzy matches. Candidates
are ordered by (exact hit, smallest edit distance, log population), with ties
broken by ascending geoname id so results are total and reproducible.

The index is immutable once built and safe for concurrent queries.
"""

from __future__ import annotations

import json
import math
import struct
import zlib
from collections import Counter
from dataclasses import dataclass, field

from placelink.features import bounded_edit_distance
from placelink.gazetteer import GazetteerEntry, normalize_name

INDEX_MAGIC = b"PLGAZIDX"
INDEX_FORMAT_VERSION = 1

# Scalar retrieval score packs the (exact, -edit distance, log population)
# ordering tuple: the population term stays < 1e3 and edit distances < 1e3,
# so each component dominates the next.
_EXACT_WEIGHT = 1.0e6
_DISTANCE_WEIGHT = 1.0e3


class IndexFileError(Exception):
    """Raised when an index file cannot be read."""


class IndexVersionError(IndexFileError):
    """Raised when an index file was written by an incompatible format version."""


class IndexCorruptError(IndexFileError):
    """Raised when an index file is truncated or otherwise unreadable."""


@dataclass(frozen=True)
class IndexConfig:
    ngram_size: int = 3
    max_candidates: int = 50
    max_edit_distance: int = 2
    fuzzy_min_shared_ngrams: int = 2

    def __post_init__(self) -> None:
        if self.ngram_size < 2:
            raise ValueError(f"ngram_size must be >= 2, got {self.ngram_size}")
        if self.max_candidates < 1:
            raise ValueError(f"max_candidates must be >= 1, got {self.max_candidates}")
        if self.max_edit_distance < 0:
            raise ValueError("max_edit_distance must be non-negative")
        if self.fuzzy_min_shared_ngrams < 1:
            raise ValueError("fuzzy_min_shared_ngrams must be >= 1")


@dataclass
class CandidateSet:
    """Retrieved candidates for one query, best first."""

    query_text: str
    normalized_query: str
    candidates: list[tuple[GazetteerEntry, float]]
    gold_id: int | None = None

    def entries(self) -> list[GazetteerEntry]:
        return [entry for entry, _ in self.candidates]

    def ids(self) -> list[int]:
        return [entry.geoname_id for entry, _ in self.candidates]

    def __len__(self) -> int:
        return len(self.candidates)

    def without_id(self, geoname_id: int) -> "CandidateSet":
        """Copy with one entry removed (used for impossible-case training)."""
        return CandidateSet(
            query_text=self.query_text,
            normalized_query=self.normalized_query,
            candidates=[(e, s) for e, s in self.candidates if e.geoname_id != geoname_id],
            gold_id=self.gold_id,
        )


def char_ngrams(text: str, n: int) -> list[str]:
    """Sliding-window character n-grams; empty for text shorter than n."""
    if len(text) < n:
        return []
    return [text[i : i + n] for i in range(len(text) - n + 1)]


@dataclass
class GazetteerIndex:
    config: IndexConfig
    entry_store: dict[int, GazetteerEntry] = field(default_factory=dict)
    exact_index: dict[str, list[int]] = field(default_factory=dict)
    ngram_index: dict[str, list[int]] = field(default_factory=dict)
    # normalized name variants per entry, the unit both trigram blocking and
    # edit-distance scoring run over
    variants: dict[int, list[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entry_store)

    @property
    def name_count(self) -> int:
        return len(self.exact_index)


def build_index(entries: list[GazetteerEntry], config: IndexConfig | None = None) -> GazetteerIndex:
    """Build the exact and trigram indexes over every name variant.

    Deterministic for a fixed entry order; raises ValueError on an empty
    entry list.
    """
    if not entries:
        raise ValueError("cannot build an index from an empty entry list")
    config = config or IndexConfig()
    index = GazetteerIndex(config=config)
    exact: dict[str, set[int]] = {}
    grams: dict[str, set[int]] = {}
    for entry in entries:
        gid = entry.geoname_id
        index.entry_store[gid] = entry
        names = entry.name_variants()
        index.variants[gid] = names
        entry_grams: set[str] = set()
        for name in names:
            exact.setdefault(name, set()).add(gid)
            entry_grams.update(char_ngrams(name, config.ngram_size))
        for gram in entry_grams:
            grams.setdefault(gram, set()).add(gid)
    index.exact_index = {name: sorted(ids) for name, ids in exact.items()}
    index.ngram_index = {gram: sorted(ids) for gram, ids in grams.items()}
    return index


def retrieval_score(exact: bool, min_distance: int, population: int) -> float:
    """Scalar encoding of the (exact, -distance, log10(population+1)) ordering."""
    return (
        (_EXACT_WEIGHT if exact else 0.0)
        - _DISTANCE_WEIGHT * min_distance
        + math.log10(population + 1)
    )


def query(index: GazetteerIndex, name: str, k: int | None = None) -> CandidateSet:
    """Retrieve the top-k candidate entries for a place name.

    Exact matches on any indexed variant come first; fuzzy candidates must
    share at least ``fuzzy_min_shared_ngrams`` trigrams with the query and lie
    within ``max_edit_distance`` of some variant. An empty query yields an
    empty candidate set; k must be positive.
    """
    config = index.config
    if k is None:
        k = config.max_candidates
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    normalized = normalize_name(name)
    if not normalized:
        return CandidateSet(query_text=name, normalized_query=normalized, candidates=[])

    exact_ids = set(index.exact_index.get(normalized, ()))

    shared: Counter[int] = Counter()
    for gram in set(char_ngrams(normalized, config.ngram_size)):
        for gid in index.ngram_index.get(gram, ()):
            shared[gid] += 1

    scored: list[tuple[float, int]] = []
    for gid in exact_ids:
        entry = index.entry_store[gid]
        scored.append((retrieval_score(True, 0, entry.population), gid))
    max_dist = config.max_edit_distance
    for gid, count in shared.items():
        if gid in exact_ids or count < config.fuzzy_min_shared_ngrams:
            continue
        best = _min_variant_distance(normalized, index.variants[gid], max_dist)
        if best is None:
            continue
        entry = index.entry_store[gid]
        scored.append((retrieval_score(False, best, entry.population), gid))

    scored.sort(key=lambda item: (-item[0], item[1]))
    top = scored[:k]
    return CandidateSet(
        query_text=name,
        normalized_query=normalized,
        candidates=[(index.entry_store[gid], score) for score, gid in top],
    )


def _min_variant_distance(query_text: str, names: list[str], bound: int) -> int | None:
    """Smallest edit distance from the query to any name, or None if every
    name exceeds the bound."""
    best: int | None = None
    for name in names:
        if abs(len(name) - len(query_text)) > bound:
            continue
        dist = bounded_edit_distance(query_text, name, bound)
        if dist is None:
            continue
        if best is None or dist < best:
            best = dist
            if best == 0:
                break
    return best


def save_index(index: GazetteerIndex, path: str) -> None:
    """Write the index to a single versioned file (magic, version, then a
    zlib-compressed JSON payload of the entries and build config)."""
    payload = {
        "config": {
            "ngram_size": index.config.ngram_size,
            "max_candidates": index.config.max_candidates,
            "max_edit_distance": index.config.max_edit_distance,
            "fuzzy_min_shared_ngrams": index.config.fuzzy_min_shared_ngrams,
        },
        "entries": [_entry_to_row(e) for e in index.entry_store.values()],
    }
    blob = zlib.compress(json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8"))
    with open(path, "wb") as handle:
        handle.write(INDEX_MAGIC)
        handle.write(struct.pack("<I", INDEX_FORMAT_VERSION))
        handle.write(blob)


def load_index(path: str) -> GazetteerIndex:
    """Read an index file written by :func:`save_index`; query results are
    identical because the file stores the entries and the build is
    deterministic."""
    try:
        with open(path, "rb") as handle:
            data = handle.read()
    except OSError as exc:
        raise IndexFileError(f"cannot read index file {path!r}: {exc}") from exc
    header_len = len(INDEX_MAGIC) + 4
    if len(data) < header_len:
        raise IndexCorruptError(f"index file {path!r} is truncated")
    if data[: len(INDEX_MAGIC)] != INDEX_MAGIC:
        raise IndexCorruptError(f"{path!r} is not a gazetteer index file")
    (version,) = struct.unpack_from("<I", data, len(INDEX_MAGIC))
    if version != INDEX_FORMAT_VERSION:
        raise IndexVersionError(
            f"index file {path!r} has format version {version}, "
            f"this build reads version {INDEX_FORMAT_VERSION}"
        )
    try:
        payload = json.loads(zlib.decompress(data[header_len:]).decode("utf-8"))
        config = IndexConfig(**payload["config"])
        entries = [_entry_from_row(row) for row in payload["entries"]]
    except (zlib.error, json.JSONDecodeError, KeyError, TypeError, UnicodeDecodeError) as exc:
        raise IndexCorruptError(f"index file {path!r} is corrupt: {exc}") from exc
    return build_index(entries, config)


def _entry_to_row(entry: GazetteerEntry) -> list:
    return [
        entry.geoname_id,
        entry.name,
        entry.ascii_name,
        list(entry.alternative_names),
        entry.latitude,
        entry.longitude,
        entry.feature_class,
        entry.feature_code,
        entry.country_code,
        entry.admin1_code,
        entry.admin2_code,
        entry.population,
    ]


def _entry_from_row(row: list) -> GazetteerEntry:
    return GazetteerEntry(
        geoname_id=row[0],
        name=row[1],
        ascii_name=row[2],
        alternative_names=tuple(row[3]),
        latitude=row[4],
        longitude=row[5],
        feature_class=row[6],
        feature_code=row[7],
        country_code=row[8],
        admin1_code=row[9],
        admin2_code=row[10],
        population=row[11],
    )
