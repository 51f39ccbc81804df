"""Triple-helix synergy: signed three-way mutual information of company
locations, activity codes and size classes, with exact between/within-group
decomposition across geographic scales and sectors."""

__version__ = "0.1.0"

from .entropy import (  # noqa: E402
    ContingencyTable3,
    DimensionRegistry,
    EntropyProfile,
    SynergyValue,
    build_table,
    entropy_profile,
    merge_tables,
    mutual_info2,
    mutual_info3,
)
from .taxonomy import NaceCode, SectorFlags, SizeClass, classify_sector, normalize_nace, size_class  # noqa: E402
from .geo import GeoAssignment, load_concordance, resolve_geo, zip3_of  # noqa: E402
from .ingest import CleaningStats, CompanyRecord, clean_sample, parse_companies  # noqa: E402
from .decomposition import (  # noqa: E402
    DecompositionResult,
    contribution_correlations,
    decompose,
    decompose_entropy,
    sector_summary,
    specialization_index,
    tally_sector_counts,
)
from .synth import SynthSpec, brute_force_t3, generate  # noqa: E402

__all__ = [
    "ContingencyTable3", "DimensionRegistry", "EntropyProfile", "SynergyValue", "build_table",
    "entropy_profile", "merge_tables", "mutual_info2", "mutual_info3",
    "NaceCode", "SectorFlags", "SizeClass", "classify_sector", "normalize_nace", "size_class",
    "GeoAssignment", "load_concordance", "resolve_geo", "zip3_of",
    "CleaningStats", "CompanyRecord", "clean_sample", "parse_companies",
    "DecompositionResult", "contribution_correlations", "decompose", "decompose_entropy",
    "sector_summary", "specialization_index", "tally_sector_counts",
    "SynthSpec", "brute_force_t3", "generate",
]
