"""Company CSV parsing, sample cleaning and the cleaned-sample file format.

Company CSV (header required)::

    id,zip,nace,employees,state,year,city

``state``, ``year`` and ``city`` may be absent or empty.  Cleaned samples are
written as::

    id,zip3,state,cbsa_code,csa_code,nace3,size_class,htm,mhtm,kis,htkis

with ``size_class`` the 0-based class index and sector flags as 0/1.

Everything here streams: ``iter_companies`` and ``iter_clean`` hold one row
at a time, so callers that aggregate on the fly never materialize the
sample.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import asdict, dataclass, field
from typing import IO, NamedTuple

from .errors import (
    CsvParseError,
    EmptyFileError,
    InputError,
    MissingColumnError,
    UnresolvableGeographyError,
)
from .geo import ConcordanceEntry, resolve_geo
from .taxonomy import (
    SIZE_CLASSES,
    SMALL_SIZE_CLASSES,
    NaceCode,
    SectorFlags,
    SectorRules,
    SizeClass,
    classify_sector,
    normalize_nace,
    size_class,
)

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("id", "zip", "nace", "employees")
OPTIONAL_COLUMNS = ("state", "year", "city")
SAMPLE_COLUMNS = ("id", "zip3", "state", "cbsa_code", "csa_code", "nace3", "size_class",
                  "htm", "mhtm", "kis", "htkis")


class RawCompany(NamedTuple):
    line: int
    id: str
    zip: str
    nace: str
    employees: int | None
    state: str
    year: int | None
    city: str


class Diagnostic(NamedTuple):
    line: int
    message: str


class CompanyRecord(NamedTuple):
    id: str
    zip3: str
    state: str
    cbsa: str | None
    csa: str | None
    nace: NaceCode
    flags: SectorFlags
    size: SizeClass
    employees: int | None = None
    year: int | None = None
    city: str | None = None

    @property
    def nace3(self) -> str:
        return self.nace.code


@dataclass
class CleaningStats:
    """Audit counters for one cleaning run.

    ``downloaded`` counts every data row, including rows the parser had to
    skip, so ``downloaded == usable_state + sum of all drop counters``.
    """

    downloaded: int = 0
    skipped_malformed: int = 0
    dropped_missing_zip_or_nace: int = 0
    dropped_missing_employees: int = 0
    dropped_unresolved_geography: int = 0
    dropped_excluded_nace: int = 0
    dropped_before_year_min: int = 0
    usable_state: int = 0
    usable_cbsa: int = 0
    usable_csa: int = 0
    years: dict[str, int] = field(default_factory=dict)

    DROP_FIELDS = (
        "skipped_malformed",
        "dropped_missing_zip_or_nace",
        "dropped_missing_employees",
        "dropped_unresolved_geography",
        "dropped_excluded_nace",
        "dropped_before_year_min",
    )

    @property
    def total_dropped(self) -> int:
        return sum(getattr(self, f) for f in self.DROP_FIELDS)

    def merge(self, other: CleaningStats) -> CleaningStats:
        merged = CleaningStats()
        for name in asdict(self):
            if name == "years":
                years = dict(self.years)
                for y, c in other.years.items():
                    years[y] = years.get(y, 0) + c
                merged.years = dict(sorted(years.items()))
            else:
                setattr(merged, name, getattr(self, name) + getattr(other, name))
        return merged

    def by_scale(self) -> list[dict]:
        """Records kept at each geographic scale and how many fell away."""
        return [
            {"label": "downloaded", "scale": None, "records": self.downloaded, "missing": None},
            {"label": "resolved to a state", "scale": "state", "records": self.usable_state,
             "missing": self.downloaded - self.usable_state},
            {"label": "resolved to a CBSA", "scale": "cbsa", "records": self.usable_cbsa,
             "missing": self.usable_state - self.usable_cbsa},
            {"label": "resolved to a CSA", "scale": "csa", "records": self.usable_csa,
             "missing": self.usable_state - self.usable_csa},
        ]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["years"] = dict(sorted(self.years.items()))
        out["by_scale"] = self.by_scale()
        return out


class DiagnosticLog:
    """Diagnostics sink that counts every entry but keeps only the first ``limit``."""

    def __init__(self, limit: int = 1000):
        self.limit = limit
        self.count = 0
        self.items: list[Diagnostic] = []

    def append(self, diagnostic: Diagnostic) -> None:
        self.count += 1
        if len(self.items) < self.limit:
            self.items.append(diagnostic)

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.items)


@dataclass
class ParseResult:
    rows: list[RawCompany]
    diagnostics: list[Diagnostic]

    @property
    def skipped(self) -> int:
        return len(self.diagnostics)


def _header_index(header: list[str]) -> dict[str, int]:
    names = [h.strip().lower() for h in header]
    missing = [c for c in REQUIRED_COLUMNS if c not in names]
    if missing:
        raise MissingColumnError(f"company file is missing required columns: {', '.join(missing)}")
    return {name: i for i, name in enumerate(names)}


def iter_companies(stream: IO[str], diagnostics: list[Diagnostic] | None = None) -> Iterator[RawCompany]:
    """Yield parsed company rows; malformed rows go to ``diagnostics``.

    The header is validated before the first row is yielded.  Blank lines
    are ignored.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFileError("empty-file: company file has no header row") from None
    except csv.Error as exc:
        raise CsvParseError(str(exc), 1) from exc
    idx = _header_index(header)
    return _iter_rows(reader, idx, len(header), diagnostics)


def _iter_rows(reader, idx, width, diagnostics):
    i_id, i_zip, i_nace, i_emp = (idx[c] for c in REQUIRED_COLUMNS)
    i_state, i_year, i_city = (idx.get(c) for c in OPTIONAL_COLUMNS)

    def skip(message):
        if diagnostics is not None:
            diagnostics.append(Diagnostic(reader.line_num, message))

    while True:
        try:
            for row in reader:
                if not row:
                    continue
                if len(row) != width:
                    skip(f"expected {width} fields, got {len(row)}")
                    continue
                emp_text = row[i_emp]
                employees = None
                if emp_text:
                    try:
                        employees = int(emp_text)
                    except ValueError:
                        if emp_text.strip():
                            skip(f"non-numeric employees {emp_text!r}")
                            continue
                    else:
                        if employees < 0:
                            skip(f"negative employees {employees}")
                            continue
                year = None
                if i_year is not None:
                    year_text = row[i_year]
                    if year_text and not year_text.isspace():
                        try:
                            year = int(year_text)
                        except ValueError:
                            skip(f"non-numeric year {year_text!r}")
                            continue
                # zip, nace and state are canonicalized (and stripped) downstream
                yield RawCompany(
                    reader.line_num,
                    row[i_id].strip(),
                    row[i_zip],
                    row[i_nace],
                    employees,
                    row[i_state] if i_state is not None else "",
                    year,
                    row[i_city].strip() if i_city is not None else "",
                )
            return
        except csv.Error as exc:
            skip(f"unparseable row: {exc}")


def parse_companies(stream: IO[str]) -> ParseResult:
    """Parse a whole company file into memory."""
    diagnostics: list[Diagnostic] = []
    rows = list(iter_companies(stream, diagnostics))
    return ParseResult(rows, diagnostics)


_UNRESOLVED = object()
# raw-string lookup caches are reset at this size so memory stays bounded
# when raw values are nearly unique (ZIP+4 suffixes, free-text codes)
_CACHE_LIMIT = 1 << 12


def iter_clean(
    rows: Iterable[RawCompany],
    concordance: Mapping[str, ConcordanceEntry],
    stats: CleaningStats,
    *,
    rules: SectorRules | None = None,
    exclude_nace: Iterable[str] = (),
    year_min: int | None = None,
) -> Iterator[CompanyRecord]:
    """Apply the cleaning rules row by row, updating ``stats`` in place.

    ``exclude_nace`` holds code prefixes (``"84"`` drops the whole
    division).  With ``year_min`` set, rows dated earlier are dropped; rows
    without a year are kept.
    """
    excluded = tuple(exclude_nace)
    nace_cache: dict[str, tuple] = {}
    geo_cache: dict[tuple[str, str], object] = {}
    years = stats.years
    # hot loop: bypass the NamedTuple constructor and the size-class call
    new_record = tuple.__new__
    small_sizes = SMALL_SIZE_CLASSES
    n_small = len(small_sizes)
    downloaded = bad_code = no_emp = excl = early = unresolved = n_state = n_cbsa = n_csa = 0
    try:
        for row in rows:
            _, rid, zip_raw, nace_raw, employees, state, year, city = row
            downloaded += 1
            tax = nace_cache.get(nace_raw)
            if tax is None:
                try:
                    code = normalize_nace(nace_raw)
                    tax = (code, classify_sector(code, rules),
                           code.code.startswith(excluded) if excluded else False)
                except InputError:
                    tax = (None, None, False)
                if len(nace_cache) >= _CACHE_LIMIT:
                    nace_cache.clear()
                nace_cache[nace_raw] = tax
            code, flags, is_excluded = tax
            geo_key = (zip_raw, state)
            geo = geo_cache.get(geo_key)
            if geo is None:
                try:
                    geo = resolve_geo(zip_raw, concordance, state)
                except UnresolvableGeographyError:
                    geo = _UNRESOLVED
                except InputError:
                    geo = False
                if len(geo_cache) >= _CACHE_LIMIT:
                    geo_cache.clear()
                geo_cache[geo_key] = geo
            if code is None or geo is False:
                bad_code += 1
                continue
            if employees is None:
                no_emp += 1
                continue
            if is_excluded:
                excl += 1
                continue
            if year_min is not None and year is not None and year < year_min:
                early += 1
                continue
            if geo is _UNRESOLVED:
                unresolved += 1
                continue
            cbsa = geo.cbsa.code if geo.cbsa is not None else None
            csa = geo.csa.code if geo.csa is not None else None
            n_state += 1
            if cbsa is not None:
                n_cbsa += 1
                if csa is not None:
                    n_csa += 1
            ykey = "unknown" if year is None else str(year)
            years[ykey] = years.get(ykey, 0) + 1
            size = small_sizes[employees] if employees < n_small else size_class(employees)
            yield new_record(CompanyRecord, (rid, geo.zip3, geo.state, cbsa, csa, code, flags,
                                             size, employees, year, city or None))
    finally:
        stats.downloaded += downloaded
        stats.dropped_missing_zip_or_nace += bad_code
        stats.dropped_missing_employees += no_emp
        stats.dropped_excluded_nace += excl
        stats.dropped_before_year_min += early
        stats.dropped_unresolved_geography += unresolved
        stats.usable_state += n_state
        stats.usable_cbsa += n_cbsa
        stats.usable_csa += n_csa


def clean_sample(
    rows: Iterable[RawCompany],
    concordance: Mapping[str, ConcordanceEntry],
    *,
    parse_skipped: int = 0,
    rules: SectorRules | None = None,
    exclude_nace: Iterable[str] = (),
    year_min: int | None = None,
) -> tuple[list[CompanyRecord], CleaningStats]:
    """Clean parsed rows into company records plus audit statistics.

    ``parse_skipped`` is the number of rows the parser rejected; it is
    added to both ``downloaded`` and ``skipped_malformed`` so the counters
    balance against the raw file.
    """
    stats = CleaningStats()
    records = list(iter_clean(rows, concordance, stats, rules=rules,
                              exclude_nace=exclude_nace, year_min=year_min))
    stats.downloaded += parse_skipped
    stats.skipped_malformed += parse_skipped
    stats.years = dict(sorted(stats.years.items()))
    return records, stats


def write_sample(records: Iterable[CompanyRecord], stream: IO[str]) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SAMPLE_COLUMNS)
    n = 0
    for r in records:
        f = r.flags
        writer.writerow((r.id, r.zip3, r.state, r.cbsa or "", r.csa or "", r.nace.code, r.size.index,
                         int(f.htm), int(f.mhtm), int(f.kis), int(f.htkis)))
        n += 1
    return n


def iter_sample(stream: IO[str]) -> Iterator[CompanyRecord]:
    """Read a cleaned-sample file back as company records.

    Sector flags are taken from the file, not recomputed.
    """
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptyFileError("empty-file: sample file has no header row") from None
    missing = [c for c in SAMPLE_COLUMNS if c not in header]
    if missing:
        raise MissingColumnError(f"sample file is missing columns: {', '.join(missing)}")
    pos = [header.index(c) for c in SAMPLE_COLUMNS]
    return _iter_sample_rows(reader, pos, len(header))


def _iter_sample_rows(reader, pos, width):
    flags_cache: dict[tuple, SectorFlags] = {}
    nace_cache: dict[str, NaceCode] = {}
    for row in reader:
        if not row:
            continue
        if len(row) != width:
            raise CsvParseError(f"expected {width} fields, got {len(row)}", reader.line_num)
        rid, zip3, state, cbsa, csa, nace3, size, *bits = (row[p] for p in pos)
        try:
            code = nace_cache.get(nace3)
            if code is None:
                code = nace_cache[nace3] = normalize_nace(nace3)
            fkey = tuple(bits)
            flags = flags_cache.get(fkey)
            if flags is None:
                if any(b not in ("0", "1") for b in bits):
                    raise ValueError(f"sector flags must be 0/1, got {bits}")
                flags = flags_cache[fkey] = SectorFlags(*(b == "1" for b in bits))
            size_cls = SIZE_CLASSES[int(size)]
        except (ValueError, IndexError, InputError) as exc:
            raise CsvParseError(str(exc), reader.line_num) from exc
        if not (len(zip3) == 3 and zip3.isdigit()):
            raise CsvParseError(f"zip3 must be 3 digits, got {zip3!r}", reader.line_num)
        if csa and not cbsa:
            raise CsvParseError("CSA without CBSA", reader.line_num)
        yield CompanyRecord(rid, zip3, state, cbsa or None, csa or None, code, flags, size_cls)


def read_sample(stream: IO[str]) -> list[CompanyRecord]:
    return list(iter_sample(stream))
