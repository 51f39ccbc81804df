"""NACE Rev. 2 sector flags and employee size classes.

Sector membership follows the Eurostat/OECD aggregation of high- and
medium-high-tech manufacturing and knowledge-intensive services.  Rules are
a flat mapping from a 2- or 3-digit code to a flag set; a 3-digit code
inherits its division's flags unless it has an entry of its own.
"""

from __future__ import annotations

import bisect
import csv
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Iterable, Mapping

from .errors import CsvParseError, MalformedCodeError, MissingColumnError

SECTORS = ("htm", "mhtm", "kis", "htkis")


@dataclass(frozen=True)
class NaceCode:
    """A NACE code normalized to 2 or 3 digits; ``raw`` is kept for audit."""

    code: str
    raw: str = field(default="", compare=False)

    @property
    def division(self) -> str:
        return self.code[:2]

    def __str__(self):
        return self.code


@lru_cache(maxsize=8192)
def normalize_nace(raw: str) -> NaceCode:
    """Canonicalize a raw NACE code to the three-digit analysis level.

    >>> normalize_nace("30.3").code
    '303'
    >>> normalize_nace("6201").code
    '620'
    """
    if raw is None:
        raise MalformedCodeError("empty NACE code")
    text = raw.strip().replace(".", "")
    if not text:
        raise MalformedCodeError("empty NACE code")
    if not text.isdigit() or not text.isascii():
        raise MalformedCodeError(f"non-numeric NACE code {raw!r}")
    if len(text) < 2:
        raise MalformedCodeError(f"NACE code {raw!r} has fewer than 2 digits")
    return NaceCode(text[:3], raw)


@dataclass(frozen=True)
class SectorFlags:
    htm: bool = False
    mhtm: bool = False
    kis: bool = False
    htkis: bool = False

    def __post_init__(self):
        if self.htkis and not self.kis:
            raise ValueError("htkis requires kis")
        if self.htm and self.mhtm:
            raise ValueError("htm and mhtm are mutually exclusive")

    @classmethod
    def of(cls, names: Iterable[str]) -> SectorFlags:
        names = set(names)
        unknown = names - set(SECTORS)
        if unknown:
            raise ValueError(f"unknown sector flags: {sorted(unknown)}")
        return cls(**{name: True for name in names})

    def names(self) -> tuple[str, ...]:
        return tuple(s for s in SECTORS if getattr(self, s))

    def has(self, sector: str) -> bool:
        if sector == "all":
            return True
        return getattr(self, sector)


NO_FLAGS = SectorFlags()


def _span(lo, hi):
    return [str(d) for d in range(lo, hi + 1)]


def _default_rules() -> dict[str, SectorFlags]:
    htm = SectorFlags(htm=True)
    mhtm = SectorFlags(mhtm=True)
    kis = SectorFlags(kis=True)
    htkis = SectorFlags(kis=True, htkis=True)
    rules = {}
    for code in ("21", "26", "303"):
        rules[code] = htm
    for code in ("20", "254", "27", "28", "29", "30", "325"):
        rules[code] = mhtm
    rules["301"] = NO_FLAGS
    kis_divisions = (
        ["50", "51"] + _span(58, 66) + _span(69, 75) + ["78", "80"] + _span(84, 93)
    )
    htkis_divisions = set(_span(59, 63) + ["72"])
    for code in kis_divisions:
        rules[code] = htkis if code in htkis_divisions else kis
    return rules


class SectorRules:
    """Code -> flags lookup with 3-digit entries overriding their division."""

    def __init__(self, mapping: Mapping[str, SectorFlags]):
        for code in mapping:
            if not (code.isdigit() and len(code) in (2, 3)):
                raise ValueError(f"rule code {code!r} is not a 2- or 3-digit NACE code")
        self.mapping = dict(mapping)
        self._cache: dict[str, SectorFlags] = {}

    def classify(self, code: NaceCode | str) -> SectorFlags:
        text = code.code if isinstance(code, NaceCode) else code
        flags = self._cache.get(text)
        if flags is None:
            flags = self.mapping.get(text)
            if flags is None:
                flags = self.mapping.get(text[:2], NO_FLAGS)
            self._cache[text] = flags
        return flags

    @classmethod
    def from_csv(cls, stream: IO[str]) -> SectorRules:
        """Read an override table with columns ``code,flags``.

        ``flags`` lists sector names separated by ``;``, ``|`` or spaces and
        may be empty.  Codes go through :func:`normalize_nace`.
        """
        reader = csv.DictReader(stream)
        if reader.fieldnames is None or not {"code", "flags"} <= set(reader.fieldnames):
            raise MissingColumnError("sector rule file needs columns 'code' and 'flags'")
        mapping = {}
        for row in reader:
            line = reader.line_num
            try:
                code = normalize_nace(row["code"] or "").code
                names = [n for n in re.split(r"[;| ]+", (row["flags"] or "").strip().lower()) if n]
                mapping[code] = SectorFlags.of(names)
            except (ValueError, TypeError) as exc:
                raise CsvParseError(str(exc), line) from exc
        return cls(mapping)


DEFAULT_RULES = SectorRules(_default_rules())


def classify_sector(code: NaceCode | str, rules: SectorRules | None = None) -> SectorFlags:
    """Sector flags for a normalized code; unknown codes get no flags."""
    return (rules or DEFAULT_RULES).classify(code)


@dataclass(frozen=True)
class SizeClass:
    index: int
    lower: int
    upper: int | None
    label: str

    def contains(self, employees: int) -> bool:
        return employees >= self.lower and (self.upper is None or employees <= self.upper)


_LOWER_BOUNDS = (0, 2, 5, 10, 20, 50, 100, 200, 500, 750, 1000)
_LABELS = (
    "0 or 1", "2-4", "5-9", "10-19", "20-49", "50-99",
    "100-199", "200-499", "500-749", "750-999", "> 1,000",
)

SIZE_CLASSES = tuple(
    SizeClass(
        i,
        lo,
        _LOWER_BOUNDS[i + 1] - 1 if i + 1 < len(_LOWER_BOUNDS) else None,
        _LABELS[i],
    )
    for i, lo in enumerate(_LOWER_BOUNDS)
)


def _bin(employees: int) -> SizeClass:
    return SIZE_CLASSES[bisect.bisect_right(_LOWER_BOUNDS, employees) - 1]


#: size class for every employee count below the open-ended top bin
SMALL_SIZE_CLASSES = tuple(_bin(e) for e in range(_LOWER_BOUNDS[-1] + 1))


def size_class(employees: int) -> SizeClass:
    """Bin an employee count into one of the eleven size classes."""
    if employees < 0:
        raise ValueError("employee count must be nonnegative")
    if employees < len(SMALL_SIZE_CLASSES):
        return SMALL_SIZE_CLASSES[employees]
    return SIZE_CLASSES[-1]
