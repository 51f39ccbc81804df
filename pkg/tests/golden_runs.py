"""Golden pipeline over the bundled synthetic fixture.

Run as a script to regenerate the committed files under tests/data/fixture:

    python3 tests/golden_runs.py

The test suite replays the same commands into a scratch directory and
compares every output byte for byte.
"""

import os
import sys
import tempfile
from pathlib import Path

from synergy.cli import main

FIXTURE = Path(__file__).parent / "data" / "fixture"

# generated inputs (written by ``synth``)
INPUTS = ("companies.csv", "concordance.csv", "fixture.json")

# (output file, argv with {d} for the output directory and {f} for the fixture inputs)
RUNS = (
    ("sample.csv", "ingest --companies {f}/companies.csv --concordance {f}/concordance.csv "
                   "--out {d}/sample.csv --stats {d}/stats.json"),
    ("compute_state.csv", "compute --sample {d}/sample.csv --level state"),
    ("compute_state.json", "compute --sample {d}/sample.csv --level state --format json"),
    ("compute_cbsa.csv", "compute --sample {d}/sample.csv --level cbsa"),
    ("compute_csa.csv", "compute --sample {d}/sample.csv --level csa"),
    ("compute_cbsa_htm.csv", "compute --sample {d}/sample.csv --level cbsa --sector htm"),
    ("compute_cbsa_htkis.json", "compute --sample {d}/sample.csv --level cbsa --sector htkis --format json"),
    ("specialize_cbsa.csv", "specialize --sample {d}/sample.csv --level cbsa"),
    ("specialize_state.json", "specialize --sample {d}/sample.csv --level state --format json"),
    ("correlate_cbsa.csv", "correlate --sample {d}/sample.csv --level cbsa"),
    ("tally_cbsa.csv", "tally --sample {d}/sample.csv --level cbsa"),
)

OUTPUTS = ("stats.json",) + tuple(name for name, _ in RUNS)


def synth(dest: Path) -> None:
    rc = main(["synth", "--companies", str(dest / "companies.csv"),
               "--concordance", str(dest / "concordance.csv"),
               "--manifest", str(dest / "fixture.json")])
    assert rc == 0


def run_pipeline(dest: Path, inputs: Path = FIXTURE, scratch: Path | None = None) -> None:
    """Write every golden report into ``dest``; manifests go to ``scratch``."""
    scratch = scratch or Path(tempfile.mkdtemp())
    for name, cmd in RUNS:
        argv = cmd.format(d=dest, f=inputs).split()
        if argv[0] != "ingest":
            argv += ["--out", str(dest / name)]
        argv += ["--manifest", str(scratch / (name + ".manifest.json"))]
        rc = main(argv)
        if rc != 0:
            raise RuntimeError(f"golden run {name} exited {rc}")


if __name__ == "__main__":
    FIXTURE.mkdir(parents=True, exist_ok=True)
    os.environ.setdefault("SOURCE_DATE_EPOCH", "0")
    synth(FIXTURE)
    run_pipeline(FIXTURE)
    for name in INPUTS + OUTPUTS:
        print(FIXTURE / name, file=sys.stderr)
