"""Between/within-group decomposition of synergy and entropy.

For a partition of the sample into groups G of size n_G,

    T = T0 + sum_G (n_G / N) * T_G

where T_G is the three-way mutual information inside group G and T0 is the
residual synergy that only exists at the level of the whole.  The same
identity holds for every entropy term, with H0 >= 0 because it equals the
mutual information between the grouping and the measured dimension(s).

Each record contributes the cell (zip3, nace3, size class).  Records are
streamed once into per-group sparse counts, so memory grows with the
number of distinct cells, not with the number of records.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .entropy import ContingencyTable3, entropy_profile, mutual_info3
from .errors import DegenerateVarianceError, EmptySampleError, EmptySectorError
from .ingest import CompanyRecord
from .taxonomy import SECTORS

logger = logging.getLogger(__name__)

SECTOR_CHOICES = ("all",) + SECTORS

GROUPINGS: dict[str, Callable[[CompanyRecord], Hashable]] = {
    "state": lambda r: r.state,
    "cbsa": lambda r: r.cbsa,
    "csa": lambda r: r.csa,
    "zip3": lambda r: r.zip3,
    "zip2": lambda r: r.zip3[:2],
    "size": lambda r: r.size.label,
    "nation": lambda r: "all",
}

Grouping = str | Callable[[CompanyRecord], Hashable]


def grouping_key(grouping: Grouping) -> tuple[str, Callable[[CompanyRecord], Hashable]]:
    if callable(grouping):
        return getattr(grouping, "__name__", "custom"), grouping
    try:
        return grouping, GROUPINGS[grouping]
    except KeyError:
        raise ValueError(f"unknown grouping {grouping!r}; choose from {sorted(GROUPINGS)}") from None


def record_cell(r: CompanyRecord) -> tuple[str, str, int]:
    return (r.zip3, r.nace.code, r.size.index)


GroupCounts = dict[Hashable, dict[tuple, int]]


def accumulate(
    records: Iterable[CompanyRecord],
    grouping: Grouping,
    sectors: Sequence[str] = ("all",),
    where: Callable[[CompanyRecord], bool] | None = None,
) -> dict[str, GroupCounts]:
    """Stream records into per-sector, per-group cell counts.

    Records whose group key is ``None`` (not resolvable at this scale) or
    that fail ``where`` are skipped.
    """
    _, key_fn = grouping_key(grouping)
    for s in sectors:
        if s not in SECTOR_CHOICES:
            raise ValueError(f"unknown sector {s!r}; choose from {SECTOR_CHOICES}")
    out: dict[str, GroupCounts] = {s: {} for s in sectors}
    targets = [(s, out[s]) for s in sectors]
    for r in records:
        if where is not None and not where(r):
            continue
        key = key_fn(r)
        if key is None:
            continue
        cell = (r.zip3, r.nace.code, r.size.index)
        flags = r.flags
        for s, counts in targets:
            if s != "all" and not getattr(flags, s):
                continue
            group = counts.get(key)
            if group is None:
                group = counts[key] = {}
            group[cell] = group.get(cell, 0) + 1
    return out


def _pooled(groups: GroupCounts) -> dict[tuple, int]:
    pooled: dict[tuple, int] = {}
    for cells in groups.values():
        for cell, c in cells.items():
            pooled[cell] = pooled.get(cell, 0) + c
    return pooled


@dataclass(frozen=True)
class GroupResult:
    key: Hashable
    n: int
    t: float
    weighted: float
    percent: float | None
    degenerate: bool = False

    @property
    def t_mbits(self) -> float:
        return self.t * 1000

    @property
    def weighted_mbits(self) -> float:
        return self.weighted * 1000


@dataclass(frozen=True)
class DecompositionResult:
    scale: str
    n: int
    t_total: float
    groups: tuple[GroupResult, ...]
    t0: float
    percent_t0: float | None

    @property
    def t_total_mbits(self) -> float:
        return self.t_total * 1000

    @property
    def t0_mbits(self) -> float:
        return self.t0 * 1000

    def group(self, key) -> GroupResult:
        for g in self.groups:
            if g.key == key:
                return g
        raise KeyError(key)

    def percents(self) -> dict[Hashable, float | None]:
        return {g.key: g.percent for g in self.groups}


def _percent(part: float, total: float) -> float | None:
    if total == 0:
        return None
    return 100.0 * part / total


def decompose_counts(groups: GroupCounts, scale: str = "custom") -> DecompositionResult:
    """Decompose synergy given per-group cell counts."""
    pooled = ContingencyTable3.from_label_counts(_pooled(groups))
    n = pooled.n
    if n == 0:
        raise EmptySampleError(f"no records resolvable at scale {scale!r}")
    t_total = mutual_info3(pooled).bits
    results = []
    degenerate = 0
    for key, cells in groups.items():
        table = ContingencyTable3.from_label_counts(cells)
        t_g = mutual_info3(table).bits
        weighted = (table.n / n) * t_g
        constant_geo = len(table.dims[0]) == 1
        degenerate += constant_geo
        results.append(GroupResult(key, table.n, t_g, weighted, None, constant_geo))
    t0 = math.fsum([t_total] + [-g.weighted for g in results])
    if t_total == 0:
        logger.warning("total synergy at scale %r is exactly zero; percentages are undefined", scale)
    results = [
        GroupResult(g.key, g.n, g.t, g.weighted, _percent(g.weighted, t_total), g.degenerate)
        for g in results
    ]
    if t_total == 0:
        results.sort(key=lambda g: str(g.key))
    else:
        results.sort(key=lambda g: (-g.percent, str(g.key)))
    if degenerate:
        logger.warning("%d of %d groups at scale %r have a single zip3; their synergy is exactly 0",
                       degenerate, len(results), scale)
    return DecompositionResult(scale, n, t_total, tuple(results), t0, _percent(t0, t_total))


def decompose(
    records: Iterable[CompanyRecord],
    grouping: Grouping = "state",
    *,
    where: Callable[[CompanyRecord], bool] | None = None,
) -> DecompositionResult:
    """Split the synergy of ``records`` into between-group and within-group parts.

    Records without a key at the requested scale are excluded before the
    total is computed, so the CBSA-level total covers only CBSA-resolvable
    records.
    """
    scale, _ = grouping_key(grouping)
    groups = accumulate(records, grouping, ("all",), where)["all"]
    return decompose_counts(groups, scale)


@dataclass(frozen=True)
class EntropyGroup:
    key: Hashable
    n: int
    h: float
    weighted: float


@dataclass(frozen=True)
class EntropyDecomposition:
    scale: str
    dimension: str
    n: int
    h_total: float
    h0: float
    groups: tuple[EntropyGroup, ...]


_DIM_FIELDS = {"g": "h_g", "t": "h_t", "o": "h_o", "gt": "h_gt", "go": "h_go", "to": "h_to", "gto": "h_gto"}


def decompose_entropy_counts(groups: GroupCounts, dimension: str = "g", scale: str = "custom") -> EntropyDecomposition:
    try:
        attr = _DIM_FIELDS["".join(sorted(dimension, key="gto".index))]
    except (KeyError, ValueError):
        raise ValueError(f"dimension must be a subset of 'gto', got {dimension!r}") from None
    pooled = ContingencyTable3.from_label_counts(_pooled(groups))
    if pooled.n == 0:
        raise EmptySampleError(f"no records resolvable at scale {scale!r}")
    h_total = getattr(entropy_profile(pooled), attr)
    out = []
    for key, cells in groups.items():
        table = ContingencyTable3.from_label_counts(cells)
        h = getattr(entropy_profile(table), attr)
        out.append(EntropyGroup(key, table.n, h, (table.n / pooled.n) * h))
    h0 = math.fsum([h_total] + [-g.weighted for g in out])
    if -1e-12 < h0 < 0:
        # H0 is a mutual information; tiny negatives are rounding only
        h0 = 0.0
    out.sort(key=lambda g: (-g.weighted, str(g.key)))
    return EntropyDecomposition(scale, dimension, pooled.n, h_total, h0, tuple(out))


def decompose_entropy(
    records: Iterable[CompanyRecord],
    grouping: Grouping = "state",
    dimension: str = "g",
    *,
    where: Callable[[CompanyRecord], bool] | None = None,
) -> EntropyDecomposition:
    """Theil decomposition H = H0 + sum_G (n_G/N) H_G of one entropy term.

    ``dimension`` picks the term: ``"g"``, ``"t"``, ``"o"`` or any joint
    combination such as ``"gt"`` or ``"gto"``.
    """
    scale, _ = grouping_key(grouping)
    groups = accumulate(records, grouping, ("all",), where)["all"]
    return decompose_entropy_counts(groups, dimension, scale)


@dataclass(frozen=True)
class SectorSummary:
    sector: str
    decomposition: DecompositionResult
    n_all: int
    t_all: float
    national_share: float | None


def _summaries(counts: dict[str, GroupCounts], scale: str) -> dict[str, SectorSummary]:
    overall = decompose_counts(counts["all"], scale)
    out = {}
    for sector, groups in counts.items():
        if not groups:
            raise EmptySectorError(f"no record carries sector flag {sector!r} at scale {scale!r}")
        result = overall if sector == "all" else decompose_counts(groups, scale)
        share = None
        if overall.t_total != 0:
            share = 100.0 * (result.n / overall.n) * result.t_total / overall.t_total
        out[sector] = SectorSummary(sector, result, overall.n, overall.t_total, share)
    return out


def sector_summary(
    records: Iterable[CompanyRecord],
    sector: str = "all",
    grouping: Grouping = "state",
    *,
    where: Callable[[CompanyRecord], bool] | None = None,
) -> SectorSummary:
    """Decompose within one sector and normalize against the whole sample.

    ``national_share`` is ``100 * (n_s / N_all) * T_s / T_all``: the sector's
    synergy weighted by its share of records, as a percentage of the
    all-sector total at the same scale.
    """
    scale, _ = grouping_key(grouping)
    sectors = ("all",) if sector == "all" else ("all", sector)
    counts = accumulate(records, grouping, sectors, where)
    return _summaries(counts, scale)[sector]


def sector_summaries(
    records: Iterable[CompanyRecord],
    sectors: Sequence[str] = SECTOR_CHOICES,
    grouping: Grouping = "state",
    *,
    where: Callable[[CompanyRecord], bool] | None = None,
) -> dict[str, SectorSummary]:
    """Like :func:`sector_summary` for several sectors in a single pass."""
    scale, _ = grouping_key(grouping)
    wanted = tuple(dict.fromkeys(("all",) + tuple(sectors)))
    counts = accumulate(records, grouping, wanted, where)
    summaries = _summaries(counts, scale)
    return {s: summaries[s] for s in sectors}


@dataclass(frozen=True)
class SpecializationRow:
    key: Hashable
    sector: str
    sector_share: float | None
    all_share: float | None
    delta: float | None


def specialization_index(
    overall: DecompositionResult,
    per_sector: Mapping[str, DecompositionResult],
) -> list[SpecializationRow]:
    """Percentage-point gap between each group's sector and all-sector shares.

    Groups absent from a decomposition count as a 0% share.  When a total
    is zero the shares are undefined and the delta is ``None``.
    """
    for sector, res in per_sector.items():
        if res.scale != overall.scale:
            raise ValueError(f"sector {sector!r} was decomposed at scale {res.scale!r}, "
                             f"not {overall.scale!r}")
    keys = [g.key for g in overall.groups]
    seen = set(keys)
    extra = sorted({g.key for res in per_sector.values() for g in res.groups} - seen, key=str)
    keys += extra
    all_pct = overall.percents()
    all_defined = overall.t_total != 0
    rows = []
    for sector, res in per_sector.items():
        pct = res.percents()
        defined = all_defined and res.t_total != 0
        for key in keys:
            a = all_pct.get(key, 0.0) if all_defined else None
            s = pct.get(key, 0.0) if res.t_total != 0 else None
            rows.append(SpecializationRow(key, sector, s, a, s - a if defined else None))
    return rows


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    keys: tuple
    pearson: np.ndarray
    spearman: np.ndarray

    @property
    def n(self) -> int:
        return len(self.keys)


def _pearson(data: np.ndarray) -> np.ndarray:
    m = np.corrcoef(data)
    m = np.clip(m, -1.0, 1.0)
    m = (m + m.T) / 2
    np.fill_diagonal(m, 1.0)
    return m


def contribution_correlations(vectors: Mapping[str, Mapping[Hashable, float]]) -> CorrelationMatrix:
    """Pearson and Spearman correlations between percent-contribution vectors.

    Every vector must cover the same group keys.  Spearman uses average
    ranks for ties.
    """
    labels = tuple(vectors)
    if len(labels) < 1:
        raise ValueError("need at least one vector")
    keys = sorted(vectors[labels[0]], key=str)
    keyset = set(keys)
    for label in labels[1:]:
        if set(vectors[label]) != keyset:
            raise ValueError(f"vector {label!r} is not aligned on the same group keys")
    if len(keys) < 3:
        raise ValueError("correlations need at least 3 groups")
    data = np.array([[float(vectors[label][k]) for k in keys] for label in labels], dtype=float)
    for label, row in zip(labels, data):
        if np.all(row == row[0]):
            raise DegenerateVarianceError(f"vector {label!r} is constant")
    ranks = np.vstack([sps.rankdata(row, method="average") for row in data])
    return CorrelationMatrix(labels, tuple(keys), _pearson(data), _pearson(ranks))


SECTOR_COLUMNS = ("all",) + SECTORS


@dataclass
class TallyTable:
    scale: str
    rows: dict[Hashable, dict[str, int]] = field(default_factory=dict)
    total: dict[str, int] = field(default_factory=lambda: dict.fromkeys(SECTOR_COLUMNS, 0))


def tally_sector_counts(records: Iterable[CompanyRecord], grouping: Grouping = "state") -> TallyTable:
    """Count companies per group overall and per sector flag."""
    scale, key_fn = grouping_key(grouping)
    table = TallyTable(scale)
    rows = table.rows
    for r in records:
        key = key_fn(r)
        if key is None:
            continue
        row = rows.get(key)
        if row is None:
            row = rows[key] = dict.fromkeys(SECTOR_COLUMNS, 0)
        row["all"] += 1
        for s in r.flags.names():
            row[s] += 1
    table.rows = dict(sorted(rows.items(), key=lambda kv: str(kv[0])))
    for row in table.rows.values():
        for s, c in row.items():
            table.total[s] += c
    return table
