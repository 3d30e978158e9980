"""Corpus analytics: grant rates by slice, bail-type shares, custody durations.

Grant-rate denominators exclude withdrawn applications unless told otherwise,
and every sliced rate only counts records where the slicing field is present.
For cancellation applications the "granted" analogue is a Cancelled outcome.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass
from pathlib import Path

from .records import AgeGroup, BailType, CaseRecord, CrimeCategory, DerivedFeatures

CUSTODY_BUCKETS = [(0, 30), (31, 90), (91, 180), (181, 365), (366, 730)]
CUSTODY_BUCKET_LABELS = ["0-30", "31-90", "91-180", "181-365", "366-730", "731+"]


@dataclass(frozen=True)
class Rate:
    numerator: int
    denominator: int

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    def to_dict(self) -> dict:
        return {"numerator": self.numerator, "denominator": self.denominator,
                "rate": self.value}

    @classmethod
    def from_dict(cls, d: dict) -> "Rate":
        return cls(numerator=d["numerator"], denominator=d["denominator"])


@dataclass(frozen=True)
class CustodyStats:
    count: int
    mean_days: float
    median_days: float
    max_days: int
    histogram: dict[str, int]

    def to_dict(self) -> dict:
        return {"count": self.count, "mean_days": self.mean_days,
                "median_days": self.median_days, "max_days": self.max_days,
                "histogram": dict(self.histogram)}

    @classmethod
    def from_dict(cls, d: dict) -> "CustodyStats":
        return cls(count=d["count"], mean_days=d["mean_days"],
                   median_days=d["median_days"], max_days=d["max_days"],
                   histogram=dict(d["histogram"]))


@dataclass(frozen=True)
class StatsReport:
    total_cases: int
    include_withdrawn: bool
    cases_by_court: dict[str, int]
    bail_type_shares: dict[str, float]
    withdrawal_rate: Rate
    grant_rate_overall: Rate
    grant_rate_by_bail_type: dict[str, Rate]
    grant_rate_by_age_group: dict[str, Rate]
    grant_rate_by_past_record: dict[str, Rate]
    grant_rate_by_statute: dict[str, Rate]
    grant_rate_by_crime: dict[str, Rate]
    custody: CustodyStats | None

    def to_dict(self) -> dict:
        return {
            "total_cases": self.total_cases,
            "include_withdrawn": self.include_withdrawn,
            "cases_by_court": dict(self.cases_by_court),
            "bail_type_shares": dict(self.bail_type_shares),
            "withdrawal_rate": self.withdrawal_rate.to_dict(),
            "grant_rate_overall": self.grant_rate_overall.to_dict(),
            "grant_rate_by_bail_type": {k: v.to_dict() for k, v in self.grant_rate_by_bail_type.items()},
            "grant_rate_by_age_group": {k: v.to_dict() for k, v in self.grant_rate_by_age_group.items()},
            "grant_rate_by_past_record": {k: v.to_dict() for k, v in self.grant_rate_by_past_record.items()},
            "grant_rate_by_statute": {k: v.to_dict() for k, v in self.grant_rate_by_statute.items()},
            "grant_rate_by_crime": {k: v.to_dict() for k, v in self.grant_rate_by_crime.items()},
            "custody": self.custody.to_dict() if self.custody else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StatsReport":
        def rates(table: dict) -> dict[str, Rate]:
            return {k: Rate.from_dict(v) for k, v in table.items()}

        return cls(
            total_cases=d["total_cases"],
            include_withdrawn=d["include_withdrawn"],
            cases_by_court=dict(d["cases_by_court"]),
            bail_type_shares=dict(d["bail_type_shares"]),
            withdrawal_rate=Rate.from_dict(d["withdrawal_rate"]),
            grant_rate_overall=Rate.from_dict(d["grant_rate_overall"]),
            grant_rate_by_bail_type=rates(d["grant_rate_by_bail_type"]),
            grant_rate_by_age_group=rates(d["grant_rate_by_age_group"]),
            grant_rate_by_past_record=rates(d["grant_rate_by_past_record"]),
            grant_rate_by_statute=rates(d["grant_rate_by_statute"]),
            grant_rate_by_crime=rates(d["grant_rate_by_crime"]),
            custody=CustodyStats.from_dict(d["custody"]) if d.get("custody") else None,
        )


def _rate_of(pairs: list[tuple[bool, object]], key) -> dict[str, Rate]:
    """Group (granted, record-ish) pairs by `key(payload)`; None keys excluded."""
    groups: dict[str, list[bool]] = {}
    for granted, payload in pairs:
        k = key(payload)
        if k is None:
            continue
        groups.setdefault(k, []).append(granted)
    return {k: Rate(sum(v), len(v)) for k, v in sorted(groups.items())}


def custody_bucket(days: int) -> str:
    for (lo, hi), label in zip(CUSTODY_BUCKETS, CUSTODY_BUCKET_LABELS):
        if lo <= days <= hi:
            return label
    return CUSTODY_BUCKET_LABELS[-1]


def compute_stats(corpus: list[tuple[CaseRecord, DerivedFeatures]],
                  include_withdrawn: bool = False) -> StatsReport:
    if not corpus:
        raise ValueError("cannot compute stats over an empty corpus")

    total = len(corpus)
    courts: dict[str, int] = {}
    type_counts: dict[str, int] = {}
    withdrawn = 0
    custody_values: list[int] = []
    for record, feats in corpus:
        courts[record.court] = courts.get(record.court, 0) + 1
        type_counts[record.bail_type.value] = type_counts.get(record.bail_type.value, 0) + 1
        if record.is_withdrawal:
            withdrawn += 1
        if feats.custody_days is not None:
            custody_values.append(feats.custody_days)

    grant_pool = [(r, f) for r, f in corpus if include_withdrawn or not r.is_withdrawal]
    granted_pairs = [(r.granted_equivalent, (r, f)) for r, f in grant_pool]

    overall = Rate(sum(g for g, _ in granted_pairs), len(granted_pairs)) if granted_pairs else Rate(0, 0)

    by_type = _rate_of(granted_pairs, lambda p: p[0].bail_type.value)
    by_age = _rate_of(granted_pairs,
                      lambda p: p[1].age_group.value if p[1].age_group else None)
    by_record = _rate_of(granted_pairs,
                         lambda p: "with_record" if p[0].has_past_record else "no_record")
    by_crime = _rate_of(granted_pairs, lambda p: p[1].crime_category.value)

    # Statute rates count per citation occurrence: a case citing three statutes
    # contributes to three rows.
    statute_pairs = []
    for granted, (record, _) in granted_pairs:
        for citation in record.statutes:
            statute_pairs.append((granted, str(citation)))
    by_statute = _rate_of(statute_pairs, lambda label: label)

    custody = None
    if custody_values:
        histogram = {label: 0 for label in CUSTODY_BUCKET_LABELS}
        for days in custody_values:
            histogram[custody_bucket(days)] += 1
        histogram = {k: v for k, v in histogram.items() if v > 0}
        custody = CustodyStats(
            count=len(custody_values),
            mean_days=statistics.fmean(custody_values),
            median_days=float(statistics.median(custody_values)),
            max_days=max(custody_values),
            histogram=histogram,
        )

    # Enum-order for bail types and deterministic ordering everywhere else.
    ordered_types = {t.value: by_type[t.value] for t in BailType if t.value in by_type}
    ordered_ages = {a.value: by_age[a.value] for a in AgeGroup if a.value in by_age}
    ordered_crimes = {c.value: by_crime[c.value] for c in CrimeCategory if c.value in by_crime}

    return StatsReport(
        total_cases=total,
        include_withdrawn=include_withdrawn,
        cases_by_court=dict(sorted(courts.items())),
        bail_type_shares={t.value: type_counts[t.value] / total
                          for t in BailType if t.value in type_counts},
        withdrawal_rate=Rate(withdrawn, total),
        grant_rate_overall=overall,
        grant_rate_by_bail_type=ordered_types,
        grant_rate_by_age_group=ordered_ages,
        grant_rate_by_past_record=by_record,
        grant_rate_by_statute=by_statute,
        grant_rate_by_crime=ordered_crimes,
        custody=custody,
    )


def emit_report(stats: StatsReport, format: str, destination: str | Path) -> list[Path]:
    """Write the report as a single JSON document or one CSV per family.

    `destination` is a file path for JSON and a directory for CSV. Output is
    deterministic: identical stats yield byte-identical files.
    """
    fmt = format.strip().upper()
    if fmt == "JSON":
        emit_json(stats, destination)
        return [Path(destination)]
    if fmt == "CSV":
        return emit_csv(stats, destination)
    raise ValueError(f"unknown report format: {format!r} (use JSON or CSV)")


def emit_json(stats: StatsReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(stats.to_dict(), ensure_ascii=False, indent=2) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_csv(stats: StatsReport, directory: str | Path) -> list[Path]:
    """One CSV table per statistic family; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, header: list[str], rows: list[list]) -> None:
        path = directory / name
        _write_csv(path, header, rows)
        written.append(path)

    emit("summary.csv", ["statistic", "value"], [
        ["total_cases", stats.total_cases],
        ["include_withdrawn", str(stats.include_withdrawn).lower()],
        ["withdrawal_rate", f"{stats.withdrawal_rate.value:.6f}"],
    ])
    emit("courts.csv", ["court", "cases"],
         [[court, n] for court, n in stats.cases_by_court.items()])
    emit("bail_type_shares.csv", ["bail_type", "share"],
         [[t, f"{share:.6f}"] for t, share in stats.bail_type_shares.items()])

    rate_rows = [["overall", "all", stats.grant_rate_overall.numerator,
                  stats.grant_rate_overall.denominator, f"{stats.grant_rate_overall.value:.6f}"]]
    for family, table in [
        ("bail_type", stats.grant_rate_by_bail_type),
        ("age_group", stats.grant_rate_by_age_group),
        ("past_record", stats.grant_rate_by_past_record),
        ("statute", stats.grant_rate_by_statute),
        ("crime", stats.grant_rate_by_crime),
    ]:
        for group, rate in table.items():
            rate_rows.append([family, group, rate.numerator, rate.denominator,
                              f"{rate.value:.6f}"])
    emit("grant_rates.csv", ["family", "group", "numerator", "denominator", "rate"], rate_rows)

    custody_rows = []
    if stats.custody:
        custody_rows = [
            ["summary", "count", stats.custody.count],
            ["summary", "mean_days", f"{stats.custody.mean_days:.6f}"],
            ["summary", "median_days", f"{stats.custody.median_days:.6f}"],
            ["summary", "max_days", stats.custody.max_days],
        ]
        custody_rows.extend(["bucket", label, n] for label, n in stats.custody.histogram.items())
    emit("custody.csv", ["kind", "key", "value"], custody_rows)
    return written
