"""``synergy`` command-line interface.

Exit codes: 0 success, 2 input error, 3 empty sample at the requested scale.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from collections.abc import Iterator

from . import __version__
from . import report
from .decomposition import (
    GROUPINGS,
    SECTOR_CHOICES,
    accumulate,
    contribution_correlations,
    decompose_entropy_counts,
    sector_summaries,
    specialization_index,
    tally_sector_counts,
)
from .entropy import ContingencyTable3, mutual_info3
from .errors import DegenerateVarianceError, EmptySampleError, InputError, SynergyError
from .fixture import write_fixture
from .geo import load_aliases, load_concordance
from .ingest import CleaningStats, CompanyRecord, DiagnosticLog, iter_clean, iter_companies, iter_sample, write_sample
from .synth import brute_force_t3
from .taxonomy import SectorRules

logger = logging.getLogger("synergy")

EXIT_OK, EXIT_INPUT, EXIT_EMPTY = 0, 2, 3


def _csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _within(text: str):
    level, sep, key = text.partition("=")
    if not sep or level not in GROUPINGS or not key:
        raise argparse.ArgumentTypeError(f"expected LEVEL=KEY with LEVEL in {sorted(GROUPINGS)}")
    return level, key


def _open(path: str):
    return open(path, encoding="utf-8-sig", newline="")


def _emit(args, text: str, command: str, inputs: list[str], n_per_scale=None) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    report.atomic_write(args.out, text)
    man = report.manifest(command, _jsonable_args(args), inputs, n_per_scale)
    report.atomic_write(args.manifest or args.out + ".manifest.json", report.json_text(man))


def _jsonable_args(args) -> dict:
    skip = {"func", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _records(args) -> Iterator[CompanyRecord]:
    excluded = tuple(p for item in args.exclude_nace for p in _csv_list(item))
    with _open(args.sample) as fh:
        for r in iter_sample(fh):
            if excluded and r.nace.code.startswith(excluded):
                continue
            yield r


def _where(args):
    if not getattr(args, "within", None):
        return None
    level, key = args.within
    fn = GROUPINGS[level]
    return lambda r: fn(r) == key


def cmd_ingest(args) -> int:
    aliases = None
    if args.aliases:
        with _open(args.aliases) as fh:
            aliases = load_aliases(fh)
    with _open(args.concordance) as fh:
        concordance = load_concordance(fh, aliases)
    rules = None
    if args.nace_rules:
        with _open(args.nace_rules) as fh:
            rules = SectorRules.from_csv(fh)
    excluded = [p for item in args.exclude_nace for p in _csv_list(item)]
    stats = CleaningStats()
    diagnostics = DiagnosticLog()
    with _open(args.companies) as fh:
        rows = iter_companies(fh, diagnostics)
        records = iter_clean(rows, concordance, stats, rules=rules, exclude_nace=excluded,
                             year_min=args.year_min)
        with report.atomic_open(args.out) as out_fh:
            write_sample(records, out_fh)
    stats.downloaded += len(diagnostics)
    stats.skipped_malformed += len(diagnostics)
    stats.years = dict(sorted(stats.years.items()))
    out = stats.to_dict()
    out["concordance"] = {"rows": concordance.rows, "size": len(concordance),
                          "duplicates": concordance.duplicates, "conflicts": concordance.conflicts,
                          "dropped_code_only": concordance.dropped_code_only}
    out["diagnostics"] = [{"line": d.line, "message": d.message} for d in diagnostics]
    report.atomic_write(args.stats, report.json_text(out))
    inputs = [p for p in (args.companies, args.concordance, args.aliases, args.nace_rules) if p]
    man = report.manifest("ingest", _jsonable_args(args), inputs,
                          {"state": stats.usable_state, "cbsa": stats.usable_cbsa, "csa": stats.usable_csa})
    report.atomic_write(args.manifest or args.out + ".manifest.json", report.json_text(man))
    logger.info("ingested %d rows, kept %d", stats.downloaded, stats.usable_state)
    return EXIT_OK


def cmd_compute(args) -> int:
    if args.entropy:
        groups = accumulate(_records(args), args.level, (args.sector,), _where(args))[args.sector]
        result = decompose_entropy_counts(groups, args.entropy, args.level)
        text = (report.entropy_csv(result, args.top) if args.format == "csv"
                else report.entropy_json(result, args.top))
        _emit(args, text, "compute", [args.sample], {args.level: result.n})
        return EXIT_OK
    summary = sector_summaries(_records(args), (args.sector,), args.level, where=_where(args))[args.sector]
    if args.format == "csv":
        text = report.decomposition_csv(summary.decomposition, args.top)
    else:
        text = report.summary_json(summary, args.top)
    _emit(args, text, "compute", [args.sample], {args.level: summary.decomposition.n})
    return EXIT_OK


def cmd_specialize(args) -> int:
    summaries = sector_summaries(_records(args), ["all"] + args.sectors, args.level, where=_where(args))
    rows = specialization_index(summaries["all"].decomposition,
                                {s: summaries[s].decomposition for s in args.sectors})
    text = report.specialization_csv(rows) if args.format == "csv" else report.specialization_json(rows)
    _emit(args, text, "specialize", [args.sample], {args.level: summaries["all"].decomposition.n})
    return EXIT_OK


def cmd_correlate(args) -> int:
    summaries = sector_summaries(_records(args), args.sectors, args.level, where=_where(args))
    keys = set()
    for s in summaries.values():
        keys.update(g.key for g in s.decomposition.groups)
    vectors = {}
    for sector, s in summaries.items():
        pct = s.decomposition.percents()
        if any(v is None for v in pct.values()):
            raise EmptySampleError(f"sector {sector!r} has zero total synergy; percentages are undefined")
        vectors["%" + sector] = {k: pct.get(k, 0.0) for k in keys}
    matrix = contribution_correlations(vectors)
    text = report.correlation_csv(matrix) if args.format == "csv" else report.correlation_json(matrix)
    _emit(args, text, "correlate", [args.sample], {args.level: len(keys)})
    return EXIT_OK


def cmd_tally(args) -> int:
    where = _where(args)
    records = _records(args) if where is None else filter(where, _records(args))
    table = tally_sector_counts(records, args.level)
    text = report.tally_csv(table) if args.format == "csv" else report.tally_json(table)
    _emit(args, text, "tally", [args.sample], {args.level: table.total["all"]})
    return EXIT_OK


def cmd_synth(args) -> int:
    companies, concordance = io.StringIO(), io.StringIO()
    info = write_fixture(companies, concordance, args.records, args.seed, dirty=not args.clean)
    report.atomic_write(args.companies, companies.getvalue())
    report.atomic_write(args.concordance, concordance.getvalue())
    if args.manifest:
        report.atomic_write(args.manifest, report.json_text(info))
    return EXIT_OK


def cmd_oracle(args) -> int:
    counts = accumulate(_records(args), args.level, (args.sector,), _where(args))[args.sector]
    rows = []
    pooled: dict = {}
    for key, cells in sorted(counts.items(), key=lambda kv: str(kv[0])):
        rows.append(_oracle_row(key, cells))
        for cell, c in cells.items():
            pooled[cell] = pooled.get(cell, 0) + c
    if not pooled:
        raise EmptySampleError("no records in the selection")
    if args.level != "nation":
        rows.append(_oracle_row("TOTAL", pooled))
    if args.format == "csv":
        text = report.csv_text(
            ("key", "n", "sparse_bits", "oracle_bits", "abs_diff"),
            ((r["key"], r["n"], repr(r["sparse_bits"]), repr(r["oracle_bits"]), repr(r["abs_diff"]))
             for r in rows),
        )
    else:
        text = report.json_text(rows)
    _emit(args, text, "oracle", [args.sample])
    return EXIT_OK


def _oracle_row(key, cells: dict) -> dict:
    table = ContingencyTable3.from_label_counts(cells)
    sparse = mutual_info3(table).bits
    expanded = [cell for cell, c in cells.items() for _ in range(c)]
    dense = brute_force_t3(expanded)
    return {"key": key, "n": table.n, "sparse_bits": sparse, "oracle_bits": dense, "abs_diff": abs(sparse - dense)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synergy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="clean a company CSV into a sample file plus audit stats")
    p.add_argument("--companies", required=True)
    p.add_argument("--concordance", required=True)
    p.add_argument("--out", required=True, help="cleaned-sample CSV")
    p.add_argument("--stats", required=True, help="audit statistics JSON")
    p.add_argument("--aliases", help="CBSA alias CSV (old_cbsa_code,new_cbsa_code)")
    p.add_argument("--nace-rules", help="sector rule override CSV (code,flags)")
    p.add_argument("--year-min", type=int)
    p.add_argument("--exclude-nace", action="append", default=[], metavar="PREFIXES")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_ingest)

    def analysis(name, func, help_, sectors=None):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--sample", required=True, help="cleaned-sample CSV from `ingest`")
        p.add_argument("--level", default="state", choices=sorted(GROUPINGS))
        p.add_argument("--format", default="csv", choices=("csv", "json"))
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--manifest")
        p.add_argument("--within", type=_within, metavar="LEVEL=KEY",
                       help="restrict to one group of another scale, e.g. csa=501")
        p.add_argument("--exclude-nace", action="append", default=[], metavar="PREFIXES")
        if sectors is not None:
            p.add_argument("--sectors", type=_csv_list, default=list(sectors))
        p.set_defaults(func=func)
        return p

    p = analysis("compute", cmd_compute, "decompose synergy over groups at one scale")
    p.add_argument("--sector", default="all", choices=SECTOR_CHOICES)
    p.add_argument("--top", type=int, help="keep only the K largest contributions")
    p.add_argument("--entropy", metavar="DIMS", help="decompose an entropy term (g, t, o, gt, ...) instead")
    analysis("specialize", cmd_specialize, "sector minus all-sector percentage shares",
             sectors=("htm", "mhtm", "kis", "htkis"))
    analysis("correlate", cmd_correlate, "correlate percent contributions across sectors",
             sectors=("all", "htm", "mhtm", "htkis", "kis"))
    analysis("tally", cmd_tally, "company counts per group and sector")
    p = analysis("oracle", cmd_oracle, "check sparse synergy against the dense brute-force oracle")
    p.set_defaults(level="nation")
    p.add_argument("--sector", default="all", choices=SECTOR_CHOICES)

    p = sub.add_parser("synth", help="write a synthetic company CSV and matching concordance")
    p.add_argument("--companies", required=True)
    p.add_argument("--concordance", required=True)
    p.add_argument("--records", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=20170504)
    p.add_argument("--clean", action="store_true", help="no deliberately dirty rows")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for attr in ("sectors",):
        for s in getattr(args, attr, None) or ():
            if s not in SECTOR_CHOICES:
                parser.error(f"unknown sector {s!r}; choose from {', '.join(SECTOR_CHOICES)}")
    if getattr(args, "top", None) is not None and args.top < 1:
        parser.error("--top must be >= 1")
    try:
        return args.func(args)
    except (EmptySampleError, DegenerateVarianceError) as exc:
        print(f"synergy: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (InputError, SynergyError, OSError, ValueError) as exc:
        print(f"synergy: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
