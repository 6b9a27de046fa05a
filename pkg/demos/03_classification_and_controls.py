# %% [markdown]
# # Classifying the zoo, and two negative controls
#
# Each sampled point gets one label from generic < complex < Kahler < HKT < HK.
# Then we break things on purpose: a non-integrable triple and a wrong torsion
# coefficient in S.

# %%
from collections import Counter

from hktsusy.verifier import classify, verify_n4_closure, verify_sfhk
from hktsusy.zoo import REGISTRY

for name, entry in REGISTRY.items():
    labels = Counter(c.label for c in classify(entry, points=4, seed=3))
    print(f"{name:22s} expected {entry.expected_class:8s} got {dict(labels)}")

# %% [markdown]
# The rotated triple on flat space is pointwise quaternionic but not integrable.
# The closure check refuses it in strict mode and fails loudly otherwise.

# %%
from hktsusy.errors import ClassificationMismatch

broken = REGISTRY["broken_complex"]
try:
    verify_n4_closure(broken, points=2)
except ClassificationMismatch as exc:
    print("strict:", exc)
frag = verify_n4_closure(broken, points=2, strict=False)
print("non-strict residual", round(frag.max_residual, 3), frag.failures)

# %% [markdown]
# Changing the torsion coefficient of S from -i/4 to -i/3 spoils S = {Q, F}.

# %%
s4 = REGISTRY["conf_flat_s4"]
for coeff in (-0.25j, -1j / 3):
    r = verify_sfhk(s4, points=3, s_torsion_coeff=coeff).max_residual
    print(f"coefficient {coeff}: residual {r:.2e}")
