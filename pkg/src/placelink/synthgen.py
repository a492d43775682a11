"""Rule-based synthetic corpus generation.

Renders templated sentences around hierarchical place-name relations pulled
from a loaded gazetteer (city in state, capital of country, city in country,
or a standalone mention), so every slot filler is gold-annotated by
construction and every (place, parent) pair genuinely satisfies its relation
via admin codes. A separate augmentation pass flags a seeded fraction of
annotations as impossible cases whose gold entry is later withheld from
retrieval.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from placelink.corpus import Annotation, CorpusDocument
from placelink.gazetteer import AdminTables, GazetteerEntry

_SLOT_RE = re.compile(r"\{(PLACE|PARENT|COUNTRY)\}")

RELATION_SLOTS = {
    "city_in_state": frozenset({"PLACE", "PARENT"}),
    "capital_of_country": frozenset({"PLACE", "COUNTRY"}),
    "city_in_country": frozenset({"PLACE", "COUNTRY"}),
    "standalone": frozenset({"PLACE"}),
}


class SynthesisError(Exception):
    """The gazetteer cannot satisfy a requested template relation."""


@dataclass(frozen=True)
class Template:
    pattern: str
    relation: str

    def __post_init__(self) -> None:
        if self.relation not in RELATION_SLOTS:
            raise ValueError(f"unknown relation {self.relation!r}")
        found = [m.group(1) for m in _SLOT_RE.finditer(self.pattern)]
        required = RELATION_SLOTS[self.relation]
        if set(found) != required or len(found) != len(required):
            raise ValueError(
                f"pattern {self.pattern!r} must use each of {sorted(required)} exactly once"
            )


DEFAULT_TEMPLATES: tuple[Template, ...] = (
    Template("Protests erupted in {PLACE}, {PARENT} on Friday.", "city_in_state"),
    Template("A fire damaged a warehouse near {PLACE} in {PARENT}.", "city_in_state"),
    Template("Officials in {PLACE}, {PARENT} announced new flood measures.", "city_in_state"),
    Template("Delegates met in {PLACE}, the capital of {COUNTRY}.", "capital_of_country"),
    Template("The summit opened in {PLACE}, capital of {COUNTRY}, this week.", "capital_of_country"),
    Template("{PLACE}, the capital of {COUNTRY}, hosted the signing ceremony.", "capital_of_country"),
    Template("Heavy rain flooded {PLACE} in {COUNTRY} over the weekend.", "city_in_country"),
    Template("A strike closed factories in {PLACE}, {COUNTRY}.", "city_in_country"),
    Template("Reporters traveled to {PLACE} in {COUNTRY} after the storm.", "city_in_country"),
    Template("The earthquake was felt strongly in {PLACE}.", "standalone"),
    Template("Thousands gathered in {PLACE} to mark the anniversary.", "standalone"),
)


def _log_pop_weights(entries: Sequence[GazetteerEntry]) -> np.ndarray:
    # +2 keeps zero-population entries reachable with a small positive weight
    w = np.array([np.log10(e.population + 2.0) for e in entries], dtype=np.float64)
    return w / w.sum()


@dataclass
class _RelationPools:
    city_in_state: list[tuple[GazetteerEntry, GazetteerEntry]]
    capital_of_country: list[tuple[GazetteerEntry, GazetteerEntry]]
    city_in_country: list[tuple[GazetteerEntry, GazetteerEntry]]
    standalone: list[GazetteerEntry]


def _build_pools(entries: Sequence[GazetteerEntry], admin_tables: AdminTables) -> _RelationPools:
    by_id = {e.geoname_id: e for e in entries}
    country_entry: dict[str, GazetteerEntry] = {}
    for e in sorted(entries, key=lambda e: e.geoname_id):
        if e.feature_code == "PCLI" and e.country_code not in country_entry:
            country_entry[e.country_code] = e

    city_in_state = []
    capital_of_country = []
    city_in_country = []
    standalone = []
    for e in entries:
        if e.feature_class != "P":
            continue
        standalone.append(e)
        adm1_id = admin_tables.adm1_id(e.country_code, e.admin1_code)
        if adm1_id is not None and adm1_id != e.geoname_id and adm1_id in by_id:
            city_in_state.append((e, by_id[adm1_id]))
        country = country_entry.get(e.country_code)
        if country is not None:
            city_in_country.append((e, country))
            if e.feature_code == "PPLC":
                capital_of_country.append((e, country))
    return _RelationPools(city_in_state, capital_of_country, city_in_country, standalone)


def _render(template: Template, values: dict[str, GazetteerEntry]) -> tuple[str, list[Annotation]]:
    parts: list[str] = []
    annotations: list[Annotation] = []
    pos = 0
    consumed = 0
    for m in _SLOT_RE.finditer(template.pattern):
        literal = template.pattern[consumed : m.start()]
        parts.append(literal)
        pos += len(literal)
        entry = values[m.group(1)]
        parts.append(entry.name)
        annotations.append(
            Annotation(
                start=pos,
                end=pos + len(entry.name),
                surface=entry.name,
                gold_geoname_id=entry.geoname_id,
                gold_lat=entry.latitude,
                gold_lon=entry.longitude,
                gold_country=entry.country_code,
                gold_admin1=entry.admin1_code,
                gold_feature_class=entry.feature_class,
            )
        )
        pos += len(entry.name)
        consumed = m.end()
    parts.append(template.pattern[consumed:])
    return "".join(parts), annotations


def generate_corpus(
    entries: Sequence[GazetteerEntry],
    admin_tables: AdminTables,
    n: int,
    seed: int,
    templates: Sequence[Template] | None = None,
) -> list[CorpusDocument]:
    """n templated documents, sampled deterministically for a given seed.
    Place fillers are drawn with probability proportional to log-population."""
    if n < 0:
        raise ValueError("n must be >= 0")
    templates = tuple(templates) if templates is not None else DEFAULT_TEMPLATES
    if not templates:
        raise ValueError("at least one template is required")
    pools = _build_pools(entries, admin_tables)
    used_relations = []
    for t in templates:
        if t.relation not in used_relations:
            used_relations.append(t.relation)
    for relation in used_relations:
        if not getattr(pools, relation):
            raise SynthesisError(f"no gazetteer entries satisfy relation {relation!r}")

    weights = {
        relation: _log_pop_weights(
            [p[0] if isinstance(p, tuple) else p for p in getattr(pools, relation)]
        )
        for relation in used_relations
    }
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(n):
        template = templates[int(rng.integers(len(templates)))]
        pool = getattr(pools, template.relation)
        pick = pool[int(rng.choice(len(pool), p=weights[template.relation]))]
        if template.relation == "standalone":
            values = {"PLACE": pick}
        elif template.relation == "city_in_state":
            values = {"PLACE": pick[0], "PARENT": pick[1]}
        else:
            values = {"PLACE": pick[0], "COUNTRY": pick[1]}
        text, annotations = _render(template, values)
        docs.append(CorpusDocument(doc_id=f"synth-{i:06d}", text=text, annotations=annotations))
    return docs


def augment_impossible(
    docs: Sequence[CorpusDocument], fraction: float, seed: int
) -> list[CorpusDocument]:
    """Copy of the corpus with a seeded round(fraction * N) of the gold-bearing
    annotations flagged exclude_gold. Text and offsets are never touched."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    eligible = [
        (di, ai)
        for di, doc in enumerate(docs)
        for ai, ann in enumerate(doc.annotations)
        if ann.gold_geoname_id is not None
    ]
    count = int(round(fraction * len(eligible)))
    rng = np.random.default_rng(seed)
    chosen = set()
    if count:
        picked = rng.choice(len(eligible), size=count, replace=False)
        chosen = {eligible[int(i)] for i in picked}
    out = []
    for di, doc in enumerate(docs):
        annotations = [
            replace(ann, exclude_gold=True) if (di, ai) in chosen else replace(ann)
            for ai, ann in enumerate(doc.annotations)
        ]
        out.append(
            CorpusDocument(
                doc_id=doc.doc_id,
                text=doc.text,
                annotations=annotations,
                event_trigger=doc.event_trigger,
            )
        )
    return out
