"""Rendering of analysis results as CSV or JSON text, plus run manifests.

CSV output rounds millibits to one decimal and percentages to two; JSON
keeps full precision.  Both renderings are deterministic for identical
inputs, so reports can be compared byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
import time
from collections.abc import Iterable, Mapping
from contextlib import contextmanager
from datetime import datetime, timezone

from . import __version__
from .decomposition import (
    SECTOR_COLUMNS,
    CorrelationMatrix,
    DecompositionResult,
    EntropyDecomposition,
    SectorSummary,
    SpecializationRow,
    TallyTable,
)


def fmt(value: float | None, decimals: int) -> str:
    """Fixed-point rendering; ``None`` becomes an empty cell and -0 becomes 0."""
    if value is None:
        return ""
    text = f"{value:.{decimals}f}"
    if text.startswith("-") and float(text) == 0:
        text = text[1:]
    return text


def fmt_mbits(bits: float | None) -> str:
    return fmt(None if bits is None else bits * 1000, 1)


def fmt_pct(pct: float | None) -> str:
    return fmt(pct, 2)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def decomposition_csv(result: DecompositionResult, top: int | None = None) -> str:
    rows = [
        (g.key, g.n, fmt_mbits(g.t), fmt_mbits(g.weighted), fmt_pct(g.percent))
        for g in result.groups[:top]
    ]
    rows.append(("T0", "", fmt_mbits(result.t0), fmt_mbits(result.t0), fmt_pct(result.percent_t0)))
    rows.append(("TOTAL", result.n, fmt_mbits(result.t_total), fmt_mbits(result.t_total),
                 "" if result.percent_t0 is None else fmt_pct(100.0)))
    return csv_text(("key", "n", "t_mbits", "weighted_mbits", "percent"), rows)


def decomposition_dict(result: DecompositionResult, top: int | None = None) -> dict:
    return {
        "scale": result.scale,
        "n": result.n,
        "t_total_bits": result.t_total,
        "t_total_mbits": result.t_total_mbits,
        "t0_bits": result.t0,
        "t0_mbits": result.t0_mbits,
        "percent_t0": result.percent_t0,
        "groups_total": len(result.groups),
        "groups": [
            {
                "key": g.key,
                "n": g.n,
                "t_bits": g.t,
                "t_mbits": g.t_mbits,
                "weighted_bits": g.weighted,
                "weighted_mbits": g.weighted_mbits,
                "percent": g.percent,
                "degenerate": g.degenerate,
            }
            for g in result.groups[:top]
        ],
    }


def entropy_csv(result: EntropyDecomposition, top: int | None = None) -> str:
    rows = [(g.key, g.n, fmt(g.h, 4), fmt(g.weighted, 4)) for g in result.groups[:top]]
    rows.append(("H0", "", fmt(result.h0, 4), fmt(result.h0, 4)))
    rows.append(("TOTAL", result.n, fmt(result.h_total, 4), fmt(result.h_total, 4)))
    return csv_text(("key", "n", "h_bits", "weighted_bits"), rows)


def entropy_json(result: EntropyDecomposition, top: int | None = None) -> str:
    return json_text({
        "scale": result.scale,
        "dimension": result.dimension,
        "n": result.n,
        "h_total_bits": result.h_total,
        "h0_bits": result.h0,
        "groups_total": len(result.groups),
        "groups": [{"key": g.key, "n": g.n, "h_bits": g.h, "weighted_bits": g.weighted}
                   for g in result.groups[:top]],
    })


def summary_json(summary: SectorSummary, top: int | None = None) -> str:
    out = {"sector": summary.sector}
    out.update(decomposition_dict(summary.decomposition, top))
    out["n_all"] = summary.n_all
    out["t_all_mbits"] = summary.t_all * 1000
    out["national_share"] = summary.national_share
    return json_text(out)


def specialization_csv(rows: Iterable[SpecializationRow]) -> str:
    return csv_text(
        ("key", "sector", "sector_share", "all_share", "delta"),
        ((r.key, r.sector, fmt_pct(r.sector_share), fmt_pct(r.all_share), fmt_pct(r.delta)) for r in rows),
    )


def specialization_json(rows: Iterable[SpecializationRow]) -> str:
    return json_text([
        {"key": r.key, "sector": r.sector, "sector_share": r.sector_share,
         "all_share": r.all_share, "delta": r.delta}
        for r in rows
    ])


def correlation_csv(m: CorrelationMatrix) -> str:
    rows = []
    for name, mat in (("pearson", m.pearson), ("spearman", m.spearman)):
        for label, row in zip(m.labels, mat):
            rows.append((name, label, *(fmt(v, 3) for v in row)))
    return csv_text(("matrix", "label", *m.labels), rows)


def correlation_json(m: CorrelationMatrix) -> str:
    return json_text({
        "labels": list(m.labels),
        "n": m.n,
        "keys": list(m.keys),
        "pearson": m.pearson.tolist(),
        "spearman": m.spearman.tolist(),
    })


def tally_csv(t: TallyTable) -> str:
    rows = [(key, *(row[s] for s in SECTOR_COLUMNS)) for key, row in t.rows.items()]
    rows.append(("TOTAL", *(t.total[s] for s in SECTOR_COLUMNS)))
    return csv_text(("key", *SECTOR_COLUMNS), rows)


def tally_json(t: TallyTable) -> str:
    return json_text({"scale": t.scale, "rows": t.rows, "total": t.total})


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else time.time()
    return datetime.fromtimestamp(t, tz=timezone.utc).isoformat(timespec="seconds")


def manifest(command: str, arguments: Mapping, inputs: Iterable[str], n_per_scale: Mapping | None = None) -> dict:
    return {
        "tool": "synergy",
        "version": __version__,
        "command": command,
        "arguments": dict(arguments),
        "inputs": {p: sha256_file(p) for p in inputs},
        "n_per_scale": dict(n_per_scale or {}),
        "timestamp": _timestamp(),
    }


@contextmanager
def atomic_open(path: str):
    """Text handle on a temporary file that replaces ``path`` on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    # mkstemp creates 0600; give the report ordinary umask permissions
    umask = os.umask(0)
    os.umask(umask)
    os.chmod(tmp, 0o666 & ~umask)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write(path: str, text: str) -> None:
    with atomic_open(path) as fh:
        fh.write(text)
