# %% [markdown]
# # Four supercharges on a curved four-manifold
#
# Build Q and the three S charges on a conformally flat chart, bracket them
# pairwise and compare with 2i H. Every object is a truncated Taylor jet at a
# single point, so "zero" means zero up to rounding.

# %%
import numpy as np

from hktsusy.superspace import bracket, residual_norm
from hktsusy.verifier import PointContext, closure_matrix, sample_points
from hktsusy.zoo import REGISTRY

entry = REGISTRY["conf_flat_s4"]
print(entry.description)
x = sample_points(entry, 1, seed=1)[0]
ctx = PointContext(entry, x)
print("point", np.round(x, 4), "->", ctx.classification(1e-8).label)

# %% [markdown]
# The closure matrix holds |{Q^a, Q^b} - 2i delta^ab H| divided by the size of H.

# %%
M, spread = closure_matrix(ctx.charges)
np.set_printoptions(precision=2)
print(M)
print("hamiltonian spread", spread)

# %% [markdown]
# The torsion term matters. Dropping it from Q leaves the torsion-free spin
# connection, and the algebra no longer closes on this HKT geometry.

# %%
from hktsusy.supercharges import build_Q_real, build_S

geom = ctx.geom
Q_bare = build_Q_real(geom)
S_bare = build_S(geom, ctx.structures[0])
H_bare = bracket(Q_bare, Q_bare).scale(1 / 2j)
print("{Q,S1} without torsion:", residual_norm(bracket(Q_bare, S_bare)) / residual_norm(H_bare))

# %% [markdown]
# The Hopf metric on the shell sqrt 2 < |x| < 2 sqrt 2 behaves the same way.

# %%
hopf = REGISTRY["hopf"]
worst = max(closure_matrix(PointContext(hopf, p).charges)[0].max() for p in sample_points(hopf, 5, seed=2))
print("hopf worst closure residual over 5 points:", worst)
