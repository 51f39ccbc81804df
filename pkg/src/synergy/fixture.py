"""Synthetic company populations in the ingest CSV schema.

The default population has three states and six CBSAs.  On top of an
independent background it plants sector-specific structure:

* HTM companies in CBSA 10001 follow an XOR pattern over (zip3, nace, size),
  which yields strongly negative synergy;
* MHTM companies in CBSA 10003 follow the same XOR pattern on other codes;
* HTKIS companies in CBSA 10005 follow a copy (diagonal) pattern, which
  yields positive synergy.

A small share of rows is deliberately dirty (missing codes, malformed
employee counts, unmatched ZIPs) so the cleaning audit has work to do.

Row ``i`` consumes exactly ``DRAWS_PER_ROW`` consecutive SplitMix64 outputs,
starting at output ``i * DRAWS_PER_ROW``; slot meanings are listed in
``_SLOTS``.  Weighted picks take ``draw % total_weight`` and return the
first index whose cumulative weight exceeds it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np

from .geo import CONCORDANCE_COLUMNS
from .synth import RNG_NAME, splitmix64_array

COMPANY_COLUMNS = ("id", "zip", "nace", "employees", "state", "year", "city")


@dataclass(frozen=True)
class Region:
    state: str
    cbsa: tuple[str, str, str] | None  # code, name, metro|micro
    csa: tuple[str, str] | None
    zip3s: tuple[str, ...]
    weight: int


REGIONS = (
    Region("CA", ("10001", "Alpha Metro, CA", "metro"), ("501", "Alpha-Beta CSA"), ("940", "941", "943"), 22),
    Region("CA", ("10002", "Beta Metro, CA", "metro"), ("501", "Alpha-Beta CSA"), ("950", "951", "952"), 14),
    Region("CA", None, None, ("955",), 4),
    Region("NJ", ("10003", "Gamma Metro, NJ", "metro"), ("502", "Gamma CSA"), ("070", "071", "072"), 18),
    Region("NJ", ("10004", "Delta Micro, NJ", "micro"), None, ("080", "081", "082"), 8),
    Region("NJ", None, None, ("085",), 3),
    Region("TX", ("10005", "Epsilon Metro, TX", "metro"), None, ("750", "751", "752"), 16),
    Region("TX", ("10006", "Zeta Micro, TX", "micro"), ("503", "Zeta CSA"), ("765", "766", "767"), 10),
    Region("TX", None, None, ("790",), 5),
)

# background NACE pool as raw codes appear in source data, with weights
NACE_POOL = (
    ("21", 2), ("26.1", 3), ("263", 2), ("30.3", 1), ("301", 1),
    ("20", 3), ("254", 1), ("27", 3), ("28", 4), ("29", 3), ("325", 2),
    ("62", 6), ("6201", 3), ("631", 2), ("72", 2), ("59", 1),
    ("64", 6), ("69", 5), ("70", 4), ("86", 7), ("85", 3),
    ("47", 12), ("56", 9), ("41", 8), ("43", 7), ("10", 3), ("84", 2), ("96", 6),
)

# representative employee counts, skewed towards micro firms
EMPLOYEE_POOL = (
    (1, 2), (3, 40), (7, 6), (12, 18), (30, 12), (70, 9),
    (150, 5), (300, 4), (600, 2), (800, 1), (2500, 1),
)

# region index -> (share in per-mille, two zip3s, two nace codes, two employee counts, kind)
PLANTED = {
    0: (100, ("940", "941"), ("261", "211"), (3, 12), "xor"),
    3: (100, ("070", "071"), ("281", "291"), (3, 30), "xor"),
    6: (80, ("750", "751"), ("620", "631"), (3, 150), "copy"),
}

DRAWS_PER_ROW = 12
_SLOTS = ("region", "planted", "bit_a", "bit_b", "zip3", "nace", "employees",
          "zip5_suffix", "year_roll", "year_offset", "dirt", "plus4")


def _weighted(draws: np.ndarray, weights) -> np.ndarray:
    cum = np.cumsum(np.asarray(weights, dtype=np.uint64))
    return np.searchsorted(cum, draws % cum[-1], side="right")


def build_fixture(n_records: int = 10_000, seed: int = 20170504, dirty: bool = True):
    """Return ``(company_rows, concordance_rows)`` as lists of tuples."""
    d = splitmix64_array(seed, n_records * DRAWS_PER_ROW).reshape(n_records, DRAWS_PER_ROW)
    slot = {name: d[:, i] for i, name in enumerate(_SLOTS)}

    region = _weighted(slot["region"], [r.weight for r in REGIONS])
    n_zip = np.array([len(r.zip3s) for r in REGIONS], dtype=np.uint64)
    zip_pick = (slot["zip3"] % n_zip[region]).astype(np.int64)
    nace_pick = _weighted(slot["nace"], [w for _, w in NACE_POOL])
    emp_pick = _weighted(slot["employees"], [w for _, w in EMPLOYEE_POOL])
    a = (slot["bit_a"] % 2).astype(np.int64)
    b = (slot["bit_b"] % 2).astype(np.int64)
    planted_roll = slot["planted"] % 1000
    suffix = (slot["zip5_suffix"] % 2).astype(np.int64)
    year = np.where(slot["year_roll"] % 5 != 0, 2016, 2010 + (slot["year_offset"] % 6).astype(np.int64))
    dirt = (slot["dirt"] % 1000).astype(np.int64) if dirty else np.full(n_records, 1000)
    plus4 = (slot["plus4"] % 10000).astype(np.int64)

    planted_share = np.zeros(len(REGIONS), dtype=np.uint64)
    for idx, spec in PLANTED.items():
        planted_share[idx] = spec[0]
    is_planted = planted_roll < planted_share[region]

    companies = []
    rows = zip(region.tolist(), zip_pick.tolist(), nace_pick.tolist(), emp_pick.tolist(),
               a.tolist(), b.tolist(), is_planted.tolist(), suffix.tolist(), year.tolist(),
               dirt.tolist(), plus4.tolist())
    for i, (r, zp, npk, ep, ai, bi, planted, sfx, yr, roll, p4) in enumerate(rows):
        reg = REGIONS[r]
        if planted:
            _, zips, naces, emps, kind = PLANTED[r]
            if kind == "xor":
                zip3, nace, emp = zips[ai], naces[bi], emps[ai ^ bi]
            else:
                zip3, nace, emp = zips[ai], naces[ai], emps[ai]
        else:
            zip3 = reg.zip3s[zp]
            nace = NACE_POOL[npk][0]
            emp = EMPLOYEE_POOL[ep][0]
        zip_text = f"{zip3}0{sfx}"
        state = reg.state
        emp_text = str(emp)
        if roll < 57:
            if roll < 20:
                nace = ""
            elif roll < 25:
                zip_text = ""
            elif roll < 35:
                emp_text = ""
            elif roll < 38:
                emp_text = "n/a"
            elif roll < 48:
                zip_text = f"{zip_text}-{p4:04d}"
            elif roll < 53:
                # not in the concordance; state comes from the record
                zip_text = f"{zip3}99"
            elif roll < 55:
                zip_text, state = f"{zip3}98", ""
            else:
                state = ""
        companies.append((f"C{i:07d}", zip_text, nace, emp_text, state, yr, f"City{zip3}"))

    concordance = []
    for reg in REGIONS:
        cbsa_code, cbsa_name, cbsa_type = reg.cbsa or ("", "", "")
        csa_code, csa_name = reg.csa or ("", "")
        for zip3 in reg.zip3s:
            for last in ("00", "01"):
                concordance.append((f"{zip3}{last}", reg.state, cbsa_code, cbsa_name, cbsa_type,
                                    csa_code, csa_name))
    return companies, concordance


def write_rows(stream: IO[str], columns, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)


def write_fixture(companies_stream: IO[str], concordance_stream: IO[str],
                  n_records: int = 10_000, seed: int = 20170504, dirty: bool = True) -> dict:
    """Write both CSVs and return a small manifest describing the generator."""
    companies, concordance = build_fixture(n_records, seed, dirty)
    write_rows(companies_stream, COMPANY_COLUMNS, companies)
    write_rows(concordance_stream, CONCORDANCE_COLUMNS, concordance)
    return {"rng": RNG_NAME, "draws_per_row": DRAWS_PER_ROW, "seed": seed, "records": n_records,
            "dirty": dirty, "concordance_rows": len(concordance)}
