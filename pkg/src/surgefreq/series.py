"""Annual and monthly series: data model, CSV ingestion, gap infilling.

Gaps are represented by absence: a year with no usable observation is
simply not in the series. All downstream windowing runs over the
gap-collapsed observation sequence, and values are stored in cm above
the station datum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "AnnualSeries",
    "InfillReport",
    "MonthlySeries",
    "SeriesError",
    "SeriesKind",
    "annual_max_of_monthly",
    "infill_by_regression",
    "load_annual_csv",
    "load_monthly_csv",
    "load_psmsl_annual",
    "write_annual_csv",
]

PSMSL_MISSING = -99999.0


class SeriesError(ValueError):
    """Raised for unreadable files and data that violates series invariants."""


class SeriesKind(str, Enum):
    ANNUAL_MAXIMUM = "annual_maximum"
    ANNUAL_MEAN = "annual_mean"
    COVARIATE_INDEX = "covariate_index"


#: Kinds measured in cm above a datum; their values must stay positive.
WATER_LEVEL_KINDS = frozenset({SeriesKind.ANNUAL_MAXIMUM, SeriesKind.ANNUAL_MEAN})


@dataclass(frozen=True)
class AnnualSeries:
    """One observation per year, ordered, with gap years absent.

    Attributes:
        station_id: short identifier for the gauge or index.
        kind: what the values measure; water-level kinds must be > 0 cm.
        years: strictly increasing calendar years.
        values: finite values aligned with ``years``, cm for water levels.
    """

    station_id: str
    kind: SeriesKind
    years: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        kind = SeriesKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.years) != len(self.values):
            raise SeriesError(
                f"{self.station_id}: {len(self.years)} years vs {len(self.values)} values"
            )
        for prev, cur in zip(self.years, self.years[1:]):
            if cur <= prev:
                raise SeriesError(
                    f"{self.station_id}: years not strictly increasing at {cur}"
                )
        for year, value in zip(self.years, self.values):
            if not np.isfinite(value):
                raise SeriesError(f"{self.station_id}: non-finite value in {year}")
            if kind in WATER_LEVEL_KINDS and value <= 0.0:
                raise SeriesError(
                    f"{self.station_id}: non-positive level {value} cm in {year}"
                )

    @classmethod
    def from_observations(
        cls,
        station_id: str,
        kind: SeriesKind,
        observations: Iterable[tuple[int, float]],
    ) -> "AnnualSeries":
        """Build a series from (year, value) pairs, sorting by year."""
        obs = sorted(observations, key=lambda pair: pair[0])
        seen = set()
        for year, _ in obs:
            if year in seen:
                raise SeriesError(f"{station_id}: duplicate year {year}")
            seen.add(year)
        years = tuple(y for y, _ in obs)
        values = tuple(v for _, v in obs)
        return cls(station_id=station_id, kind=kind, years=years, values=values)

    @property
    def n(self) -> int:
        return len(self.years)

    @property
    def observations(self) -> tuple[tuple[int, float], ...]:
        return tuple(zip(self.years, self.values))

    def years_array(self) -> np.ndarray:
        return np.asarray(self.years, dtype=int)

    def values_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def value_for(self, year: int) -> float | None:
        """Value observed in ``year``, or None when the year is a gap."""
        mapping = getattr(self, "_by_year", None)
        if mapping is None:
            mapping = dict(zip(self.years, self.values))
            object.__setattr__(self, "_by_year", mapping)
        return mapping.get(year)


@dataclass(frozen=True)
class MonthlySeries:
    """Monthly index values ordered by (year, month)."""

    label: str
    observations: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        obs = tuple(
            (int(y), int(m), float(v)) for y, m, v in self.observations
        )
        object.__setattr__(self, "observations", obs)
        prev = None
        for year, month, value in obs:
            if not 1 <= month <= 12:
                raise SeriesError(f"{self.label}: month {month} outside 1..12")
            if not np.isfinite(value):
                raise SeriesError(f"{self.label}: non-finite value at {year}-{month:02d}")
            key = (year, month)
            if prev is not None and key <= prev:
                raise SeriesError(
                    f"{self.label}: observations not strictly increasing at {year}-{month:02d}"
                )
            prev = key

    @property
    def n(self) -> int:
        return len(self.observations)


@dataclass(frozen=True)
class InfillReport:
    """How gap years were reconstructed from a reference station."""

    filled_years: tuple[int, ...]
    regression_slope: float
    regression_intercept: float
    r_squared_of_fit: float
    n_overlap: int


def _read_rows(path) -> list[list[str]]:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            return [row for row in csv.reader(handle) if row and any(f.strip() for f in row)]
    except OSError as exc:
        raise SeriesError(f"cannot read {path}: {exc}") from exc


def load_annual_csv(path, kind: SeriesKind, station_id: str | None = None) -> AnnualSeries:
    """Load a ``year,value`` CSV; a blank value field marks a gap year.

    Raises SeriesError for unreadable files, malformed rows, duplicate
    years, and values that violate the series invariants.
    """
    path = Path(path)
    rows = _read_rows(path)
    if not rows:
        raise SeriesError(f"{path}: empty file")
    header = [field.strip().lower() for field in rows[0]]
    if header[:2] != ["year", "value"]:
        raise SeriesError(f"{path}: expected header 'year,value', got {rows[0]!r}")
    observations = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise SeriesError(f"{path}:{lineno}: expected 2 fields, got {row!r}")
        try:
            year = int(row[0].strip())
        except ValueError as exc:
            raise SeriesError(f"{path}:{lineno}: bad year {row[0]!r}") from exc
        raw = row[1].strip()
        if raw == "":
            continue  # gap year
        try:
            value = float(raw)
        except ValueError as exc:
            raise SeriesError(f"{path}:{lineno}: bad value {raw!r}") from exc
        observations.append((year, value))
    return AnnualSeries.from_observations(
        station_id=station_id or path.stem, kind=kind, observations=observations
    )


def write_annual_csv(series: AnnualSeries, path) -> None:
    """Write ``year,value`` rows; full float precision so reloads are exact."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("year,value\n")
        for year, value in series.observations:
            handle.write(f"{year},{value!r}\n")


def load_psmsl_annual(
    path,
    datum_offset_cm: float = 0.0,
    station_id: str | None = None,
) -> AnnualSeries:
    """Load a PSMSL annual metric file (semicolon-separated, values in mm).

    The marker value -99999 denotes a missing year and becomes a gap.
    Values are converted mm -> cm and shifted by ``datum_offset_cm`` so
    callers can align the record with the common station datum.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SeriesError(f"cannot read {path}: {exc}") from exc
    observations = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = [field.strip() for field in line.split(";")]
        if len(fields) < 2:
            raise SeriesError(f"{path}:{lineno}: expected 'year; value; ...', got {line!r}")
        try:
            year = int(fields[0])
            value_mm = float(fields[1])
        except ValueError as exc:
            raise SeriesError(f"{path}:{lineno}: malformed row {line!r}") from exc
        if value_mm == PSMSL_MISSING:
            continue
        observations.append((year, value_mm / 10.0 + datum_offset_cm))
    if not observations:
        raise SeriesError(f"{path}: no usable rows (all values missing)")
    return AnnualSeries.from_observations(
        station_id=station_id or path.stem,
        kind=SeriesKind.ANNUAL_MEAN,
        observations=observations,
    )


def load_monthly_csv(path, label: str | None = None) -> MonthlySeries:
    """Load a ``year,month,value`` CSV of monthly index values."""
    path = Path(path)
    rows = _read_rows(path)
    if not rows:
        raise SeriesError(f"{path}: empty file")
    header = [field.strip().lower() for field in rows[0]]
    if header[:3] != ["year", "month", "value"]:
        raise SeriesError(f"{path}: expected header 'year,month,value', got {rows[0]!r}")
    observations = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 3:
            raise SeriesError(f"{path}:{lineno}: expected 3 fields, got {row!r}")
        try:
            observations.append((int(row[0]), int(row[1]), float(row[2])))
        except ValueError as exc:
            raise SeriesError(f"{path}:{lineno}: malformed row {row!r}") from exc
    observations.sort(key=lambda obs: (obs[0], obs[1]))
    for prev, cur in zip(observations, observations[1:]):
        if prev[:2] == cur[:2]:
            raise SeriesError(f"{path}: duplicate month {cur[0]}-{cur[1]:02d}")
    return MonthlySeries(label=label or path.stem, observations=tuple(observations))


def infill_by_regression(
    target: AnnualSeries,
    reference: AnnualSeries,
    years_to_fill: Sequence[int],
    overlap: tuple[int, int] | None = None,
    min_overlap: int = 10,
) -> tuple[AnnualSeries, InfillReport]:
    """Fill gap years of ``target`` from an OLS fit against ``reference``.

    The regression target = a + b * reference is estimated over the years
    both series observe (optionally restricted to the inclusive ``overlap``
    year range), then evaluated at the reference values for each year to
    fill. Every year to fill must be present in the reference and absent
    from the target.
    """
    if target.kind != reference.kind:
        raise SeriesError(
            f"kind mismatch: target is {target.kind.value}, reference {reference.kind.value}"
        )
    years_to_fill = [int(y) for y in years_to_fill]
    target_years = set(target.years)
    common = sorted(set(target.years) & set(reference.years))
    if overlap is not None:
        lo, hi = int(overlap[0]), int(overlap[1])
        common = [y for y in common if lo <= y <= hi]
    if len(common) < min_overlap:
        raise SeriesError(
            f"insufficient overlap: {len(common)} shared years, need {min_overlap}"
        )
    for year in years_to_fill:
        if year in target_years:
            raise SeriesError(f"year {year} already present in target")
        if reference.value_for(year) is None:
            raise SeriesError(f"year {year} not available in reference")

    x = np.array([reference.value_for(y) for y in common], dtype=float)
    y = np.array([target.value_for(y) for y in common], dtype=float)
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0.0:
        raise SeriesError("reference is constant over the overlap; cannot regress")
    slope = float(np.dot(xc, y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    syy = float(np.dot(y - y.mean(), y - y.mean()))
    r_squared = 1.0 if syy == 0.0 else float(slope * slope * sxx / syy)

    filled = [
        (year, intercept + slope * reference.value_for(year)) for year in years_to_fill
    ]
    merged = AnnualSeries.from_observations(
        station_id=target.station_id,
        kind=target.kind,
        observations=list(target.observations) + filled,
    )
    report = InfillReport(
        filled_years=tuple(sorted(years_to_fill)),
        regression_slope=slope,
        regression_intercept=intercept,
        r_squared_of_fit=r_squared,
        n_overlap=len(common),
    )
    return merged, report


def annual_max_of_monthly(monthly: MonthlySeries) -> AnnualSeries:
    """Reduce monthly index values to one annual value: the year's maximum."""
    if monthly.n == 0:
        raise SeriesError(f"{monthly.label}: empty monthly series")
    maxima: dict[int, float] = {}
    for year, _, value in monthly.observations:
        if year not in maxima or value > maxima[year]:
            maxima[year] = value
    return AnnualSeries.from_observations(
        station_id=monthly.label,
        kind=SeriesKind.COVARIATE_INDEX,
        observations=sorted(maxima.items()),
    )
