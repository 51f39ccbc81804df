# coding: utf-8
# # From raw company rows to sector reports
#
# Generates the synthetic population, cleans it against a ZIP
# concordance, and decomposes synergy across states, CBSAs and sectors.
# The command-line tool runs the same steps (`synergy synth`, `ingest`,
# `compute`, `specialize`, `correlate`).

# %%
import io

from synergy import clean_sample, load_concordance, parse_companies
from synergy.decomposition import contribution_correlations, sector_summaries, specialization_index
from synergy.fixture import write_fixture

companies, concordance = io.StringIO(), io.StringIO()
print(write_fixture(companies, concordance))

# %%
parsed = parse_companies(io.StringIO(companies.getvalue()))
table = load_concordance(io.StringIO(concordance.getvalue()))
records, stats = clean_sample(parsed.rows, table, parse_skipped=parsed.skipped)
for row in stats.by_scale():
    print(f"{row['label']:<20} {row['records']:>6}")

# %% [markdown]
# Scale comparison: the between-group share generally rises as groups
# get smaller, since more of the structure sits between them.

# %%
for level in ("state", "cbsa", "csa"):
    s = sector_summaries(records, ("all",), level)["all"].decomposition
    print(f"{level:>5}: N={s.n:>5}  T={s.t_total_mbits:7.1f} mbits  T0 share={s.percent_t0:6.2f}%")

# %% [markdown]
# Sectors at CBSA scale.  The planted HTM parity structure makes CBSA
# 10001 dominate the HTM column.

# %%
sectors = ("htm", "mhtm", "kis", "htkis")
summaries = sector_summaries(records, ("all",) + sectors, "cbsa")
for sector in sectors:
    s = summaries[sector]
    top = s.decomposition.groups[0]
    print(f"{sector:>5}: national share {s.national_share:6.2f}%  top CBSA {top.key} ({top.percent:.1f}%)")

rows = specialization_index(summaries["all"].decomposition,
                            {s: summaries[s].decomposition for s in sectors})
print(max(rows, key=lambda r: r.delta))

# %%
m = contribution_correlations({s: summaries[s].decomposition.percents() for s in ("all",) + sectors})
print(m.labels)
print(m.spearman.round(3))
