# %% [markdown]
# # Which constant gauge fields keep the extended algebra?
#
# A field strength F splits into self-dual and anti-self-dual pieces. Only the
# anti-self-dual piece commutes with the canonical quaternionic triple, and only
# then does the gauged algebra still close.

# %%
import numpy as np

from hktsusy.complex_structures import asd_decompose, canonical_triple, commutant_check
from hktsusy.verifier import verify_gauge
from hktsusy.zoo import ASD_FIELD, REGISTRY, SD_FIELD

triple = canonical_triple()
for label, F in [("anti-self-dual", ASD_FIELD), ("self-dual", SD_FIELD)]:
    c = asd_decompose(F)
    res = commutant_check(F, triple)
    print(f"{label:15s} sd={np.round(c[:3], 3)} asd={np.round(c[3:], 3)} commutes={res.commutes}")

# %% [markdown]
# Now deform the momenta Pi -> Pi - A with A_M = x^N F_NM / 2 and re-check closure.

# %%
for name in ("asd_gauge", "sd_gauge", "asd_gauge_s4"):
    frag = verify_gauge(REGISTRY[name], points=3, seed=0)
    print(f"{name:13s} max residual {frag.max_residual:.2e}  passed={frag.passed}")
    for msg in frag.failures:
        print("   ", msg)

# %% [markdown]
# A random field strength almost always has a self-dual part, so it breaks the algebra.

# %%
from hktsusy.complex_structures import random_antisymmetric_tensor

rng = np.random.default_rng(0)
hits = sum(commutant_check(random_antisymmetric_tensor(rng, 4, 2), triple).commutes for _ in range(1000))
print("random F commuting with the triple:", hits, "/ 1000")
