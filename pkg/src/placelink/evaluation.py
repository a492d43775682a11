"""Resolution quality metrics.

Covers id-level exact match, great-circle error statistics, field-level
accuracies (country, top-level admin area, feature class), Acc@161km,
abstention quality over impossible cases, and retrieval missingness at
configurable candidate depths. Abstained records are excluded from distance
metrics and reported separately; impossible cases are scored only by the
abstention metrics.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

from placelink.corpus import CorpusDocument
from placelink.index import GazetteerIndex, query
from placelink.pipeline import ResolutionRecord

EARTH_RADIUS_KM = 6371.0088
ACC_THRESHOLD_KM = 161.0


@dataclass
class MetricsReport:
    n_eval: int
    exact_match: float
    mean_error_km: float
    median_error_km: float
    correct_country: float
    correct_feature_class: float
    correct_adm1: float
    acc_at_161km: float
    abstention_recall: float
    abstention_false_rate: float
    recall_at_k: dict[int, float] = field(default_factory=dict)


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance on a sphere of radius 6371.0088 km."""
    for lat in (lat1, lat2):
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} out of range")
    for lon in (lon1, lon2):
        if not -180.0 <= lon <= 180.0:
            raise ValueError(f"longitude {lon} out of range")
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def _fraction(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def evaluate(records: Sequence[ResolutionRecord]) -> MetricsReport:
    """Aggregate metrics over resolution records carrying gold fields.

    Denominators: exact_match is over non-impossible records with a gold id
    (an abstention there is a miss); distance and field accuracies are over
    non-impossible, non-abstained records with the needed gold fields;
    abstention_recall is over impossible records; abstention_false_rate is
    over non-impossible records whose gold was actually retrievable.
    recall_at_k is left empty here (see query_recall)."""
    if not records:
        raise ValueError("cannot evaluate an empty record list")

    possible = [r for r in records if not r.impossible]
    impossible = [r for r in records if r.impossible]

    with_gold_id = [r for r in possible if r.gold_geoname_id is not None]
    exact = sum(
        1 for r in with_gold_id if r.predicted_geoname_id == r.gold_geoname_id
    )

    resolved = [r for r in possible if not r.abstained]
    distances = [
        haversine_km(r.predicted_lat, r.predicted_lon, r.gold_lat, r.gold_lon)
        for r in resolved
        if r.gold_lat is not None and r.gold_lon is not None
    ]
    country_hits = sum(1 for r in resolved if r.predicted_country == r.gold_country)
    adm1_hits = sum(
        1
        for r in resolved
        if r.predicted_country == r.gold_country and r.predicted_admin1 == r.gold_admin1
    )
    fclass_hits = sum(1 for r in resolved if r.predicted_feature_class == r.gold_feature_class)

    retrievable = [r for r in possible if r.gold_in_candidates]
    false_abstentions = sum(1 for r in retrievable if r.abstained)
    caught = sum(1 for r in impossible if r.abstained)

    return MetricsReport(
        n_eval=len(records),
        exact_match=_fraction(exact, len(with_gold_id)),
        mean_error_km=statistics.fmean(distances) if distances else 0.0,
        median_error_km=statistics.median(distances) if distances else 0.0,
        correct_country=_fraction(country_hits, len(resolved)),
        correct_feature_class=_fraction(fclass_hits, len(resolved)),
        correct_adm1=_fraction(adm1_hits, len(resolved)),
        acc_at_161km=_fraction(
            sum(1 for d in distances if d <= ACC_THRESHOLD_KM), len(distances)
        ),
        abstention_recall=_fraction(caught, len(impossible)),
        abstention_false_rate=_fraction(false_abstentions, len(retrievable)),
    )


def query_recall(
    index: GazetteerIndex, docs: Sequence[CorpusDocument], k_values: Sequence[int]
) -> dict[int, float]:
    """For each k, the fraction of gold-bearing annotations whose gold id is
    NOT among the top-k retrieved candidates. Impossible-flagged annotations
    are excluded (their gold is withheld by design)."""
    if not k_values:
        raise ValueError("k_values must be non-empty")
    if any(k < 1 for k in k_values):
        raise ValueError("k values must be >= 1")
    annotations = [
        ann
        for doc in docs
        for ann in doc.annotations
        if ann.gold_geoname_id is not None and not ann.exclude_gold
    ]
    if not annotations:
        raise ValueError("corpus has no gold-bearing annotations to assess")
    k_max = max(k_values)
    missing = {k: 0 for k in k_values}
    for ann in annotations:
        # the ranking is deterministic, so the top-k prefix of one deep
        # query equals a separate query at each smaller k
        ids = query(index, ann.surface, k_max).ids()
        for k in k_values:
            if ann.gold_geoname_id not in ids[:k]:
                missing[k] += 1
    return {k: missing[k] / len(annotations) for k in sorted(missing)}


def format_report(report: MetricsReport) -> str:
    """Aligned two-row table of the headline metrics, followed by abstention
    and missingness lines."""
    columns = [
        ("Exact Match", f"{report.exact_match * 100:.2f}%"),
        ("Mean Error (km)", f"{report.mean_error_km:.1f}"),
        ("Median Err. (km)", f"{report.median_error_km:.1f}"),
        ("Correct Country", f"{report.correct_country * 100:.2f}%"),
        ("Correct Type", f"{report.correct_feature_class * 100:.2f}%"),
        ("Correct ADM1", f"{report.correct_adm1 * 100:.2f}%"),
        ("Acc@161km", f"{report.acc_at_161km * 100:.2f}%"),
    ]
    widths = [max(len(h), len(v)) for h, v in columns]
    header = "  ".join(h.rjust(w) for (h, _), w in zip(columns, widths))
    values = "  ".join(v.rjust(w) for (_, v), w in zip(columns, widths))
    lines = [
        f"n_eval: {report.n_eval}",
        header,
        values,
        f"Abstention recall: {report.abstention_recall * 100:.2f}%",
        f"Abstention false rate: {report.abstention_false_rate * 100:.2f}%",
    ]
    for k, frac in sorted(report.recall_at_k.items()):
        lines.append(f"Missing@{k}: {frac * 100:.2f}%")
    return "\n".join(lines)
