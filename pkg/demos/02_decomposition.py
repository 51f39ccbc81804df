# coding: utf-8
# # Between- and within-group synergy
#
# T over the whole sample splits exactly into a between-group term T0
# plus population-weighted within-group terms.  Shares are relative to
# the total and can leave the [0, 100] range.

# %%
from synergy import decompose, decompose_entropy
from synergy.ingest import CompanyRecord
from synergy.taxonomy import SIZE_CLASSES, NaceCode, SectorFlags


def company(state, g, t, o):
    return CompanyRecord(f"{state}{g}{t}{o}", f"10{g}", state, None, None,
                         NaceCode(f"2{t}0"), SectorFlags(), SIZE_CLASSES[int(o)])


# %% [markdown]
# One redundant (parity) region and one duplicating (copy) region of
# equal size.  Their weighted contributions cancel, so the whole total
# sits in T0 and the parity region alone accounts for about 180%.

# %%
xor = [("0", "0", "0"), ("0", "1", "1"), ("1", "0", "1"), ("1", "1", "0")]
copy = [("0", "0", "0"), ("1", "1", "1")] * 2
records = [company("XR", *c) for c in xor] + [company("CP", *c) for c in copy]
res = decompose(records, "state")
for g in res.groups:
    print(f"{g.key}: t={g.t_mbits:8.1f} mbits  share={g.percent:7.2f}%")
print(f"T0: {res.t0_mbits:.1f} mbits  share={res.percent_t0:.2f}%")

# %% [markdown]
# The same split works for any entropy term; the between-group part of
# an entropy is a mutual information and never negative.

# %%
ent = decompose_entropy(records, "state", "gto")
print(f"H={ent.h_total:.4f}  H0={ent.h0:.4f}",
      {g.key: round(g.h, 4) for g in ent.groups})
