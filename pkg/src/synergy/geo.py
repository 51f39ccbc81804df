"""ZIP code canonicalization and the ZIP -> state / CBSA / CSA concordance.

Concordance CSV (header required, UTF-8)::

    zip5,state,cbsa_code,cbsa_name,cbsa_type,csa_code,csa_name

``cbsa_type`` is ``metro`` or ``micro``; absent CBSA/CSA fields are empty
strings.  An optional alias CSV ``old_cbsa_code,new_cbsa_code`` renames
CBSA codes at load time (e.g. to merge two vintages of one metro area).
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Mapping
from dataclasses import dataclass
from functools import lru_cache
from typing import IO

from .errors import CsvParseError, MalformedZipError, MissingColumnError, UnresolvableGeographyError

logger = logging.getLogger(__name__)

CONCORDANCE_COLUMNS = ("zip5", "state", "cbsa_code", "cbsa_name", "cbsa_type", "csa_code", "csa_name")
ALIAS_COLUMNS = ("old_cbsa_code", "new_cbsa_code")


@lru_cache(maxsize=4096)
def canonical_zip5(zip_raw: str) -> str:
    """Return the 5-digit form of a raw ZIP (ZIP+4 suffix stripped, zero padded)."""
    text = (zip_raw or "").strip()
    if "-" in text:
        text, _, plus4 = text.partition("-")
        if not (plus4.isdigit() and len(plus4) == 4):
            raise MalformedZipError(f"bad ZIP+4 suffix in {zip_raw!r}")
    elif len(text) == 9 and text.isdigit():
        text = text[:5]
    if not text or not text.isdigit() or not text.isascii() or len(text) > 5:
        raise MalformedZipError(f"cannot recover a 5-digit ZIP from {zip_raw!r}")
    return text.zfill(5)


def zip3_of(zip_raw: str) -> str:
    """First three digits of the canonical 5-digit ZIP.

    >>> zip3_of("02139-1234")
    '021'
    >>> zip3_of("501")
    '005'
    """
    return canonical_zip5(zip_raw)[:3]


@dataclass(frozen=True)
class Cbsa:
    code: str
    name: str
    kind: str  # "metro" | "micro"


@dataclass(frozen=True)
class Csa:
    code: str
    name: str


@dataclass(frozen=True)
class ConcordanceEntry:
    state: str
    cbsa: Cbsa | None = None
    csa: Csa | None = None


@dataclass(frozen=True)
class GeoAssignment:
    zip3: str
    state: str
    cbsa: Cbsa | None = None
    csa: Csa | None = None


class ConcordanceTable(Mapping):
    """Immutable zip5 -> :class:`ConcordanceEntry` lookup."""

    def __init__(self, entries: dict[str, ConcordanceEntry], rows: int = 0, duplicates: int = 0,
                 conflicts: int = 0, dropped_code_only: int = 0):
        self._entries = entries
        self.rows = rows
        self.duplicates = duplicates
        self.conflicts = conflicts
        self.dropped_code_only = dropped_code_only

    def __getitem__(self, zip5):
        return self._entries[zip5]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"ConcordanceTable(size={len(self)}, rows={self.rows}, conflicts={self.conflicts})"


def _require_columns(reader: csv.DictReader, columns, what: str):
    if reader.fieldnames is None:
        raise MissingColumnError(f"{what} has no header row")
    missing = [c for c in columns if c not in reader.fieldnames]
    if missing:
        raise MissingColumnError(f"{what} is missing columns: {', '.join(missing)}")


def load_aliases(stream: IO[str]) -> dict[str, str]:
    reader = csv.DictReader(stream)
    _require_columns(reader, ALIAS_COLUMNS, "alias file")
    aliases = {}
    for row in reader:
        old, new = (row["old_cbsa_code"] or "").strip(), (row["new_cbsa_code"] or "").strip()
        if not old or not new:
            raise CsvParseError("alias rows need both codes", reader.line_num)
        aliases[old] = new
    return aliases


def load_concordance(stream: IO[str], aliases: Mapping[str, str] | None = None) -> ConcordanceTable:
    """Parse a concordance CSV.

    Duplicate ZIPs resolve to the last row; a warning is logged when the
    duplicate disagrees with the earlier row.  CBSA rows that carry a code
    but no name are dropped from the CBSA/CSA scales unless ``aliases``
    maps the code to one that is named elsewhere in the file.
    """
    aliases = dict(aliases or {})
    reader = csv.DictReader(stream)
    _require_columns(reader, CONCORDANCE_COLUMNS, "concordance")
    parsed: dict[str, tuple] = {}
    names: dict[str, tuple[str, str]] = {}
    rows = duplicates = conflicts = 0
    for row in reader:
        line = reader.line_num
        rows += 1
        if None in row or any(row.get(c) is None for c in CONCORDANCE_COLUMNS):
            raise CsvParseError("wrong number of fields", line)
        f = {c: row[c].strip() for c in CONCORDANCE_COLUMNS}
        zip5 = f["zip5"]
        if not (len(zip5) == 5 and zip5.isdigit()):
            raise CsvParseError(f"zip5 must be 5 digits, got {zip5!r}", line)
        if not f["state"]:
            raise CsvParseError("state is required", line)
        code = aliases.get(f["cbsa_code"], f["cbsa_code"])
        if code:
            if f["cbsa_type"] not in ("metro", "micro"):
                raise CsvParseError(f"cbsa_type must be metro or micro, got {f['cbsa_type']!r}", line)
            if f["cbsa_name"]:
                names.setdefault(code, (f["cbsa_name"], f["cbsa_type"]))
        elif f["csa_code"]:
            raise CsvParseError("CSA given without a CBSA", line)
        record = (f["state"], code, f["cbsa_name"], f["cbsa_type"], f["csa_code"], f["csa_name"])
        if zip5 in parsed:
            duplicates += 1
            if parsed[zip5] != record:
                conflicts += 1
                logger.warning("concordance line %d: zip5 %s redefined; keeping the last row", line, zip5)
        parsed[zip5] = record

    entries = {}
    dropped = 0
    for zip5, (state, code, name, kind, csa_code, csa_name) in parsed.items():
        cbsa = csa = None
        if code:
            if not name and code in names:
                name, kind = names[code]
            if name:
                cbsa = Cbsa(code, name, kind)
                if csa_code:
                    csa = Csa(csa_code, csa_name)
            else:
                dropped += 1
        entries[zip5] = ConcordanceEntry(state, cbsa, csa)
    if dropped:
        logger.warning("%d concordance rows carry an unnamed CBSA code and were left without CBSA", dropped)
    return ConcordanceTable(entries, rows, duplicates, conflicts, dropped)


def resolve_geo(zip_raw: str, table: Mapping[str, ConcordanceEntry], state: str | None = None) -> GeoAssignment:
    """Place a ZIP in the state / CBSA / CSA hierarchy.

    Unmatched ZIPs fall back to the record's own ``state`` and carry no
    CBSA or CSA.
    """
    zip5 = canonical_zip5(zip_raw)
    entry = table.get(zip5)
    if entry is not None:
        return GeoAssignment(zip5[:3], entry.state, entry.cbsa, entry.csa)
    state = (state or "").strip()
    if not state:
        raise UnresolvableGeographyError(f"ZIP {zip5} is not in the concordance and the record has no state")
    return GeoAssignment(zip5[:3], state)
