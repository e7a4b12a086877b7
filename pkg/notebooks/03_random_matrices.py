# %% [markdown]
# # Random rectangular matrices
#
# If A and B are independent q1 x q2 matrices whose laws are invariant
# under left and right unitary multiplication, the symmetrized singular
# law of A + B approaches the rectangular free convolution of the two
# singular laws as q1 / q2 stays fixed.  Here both matrices have all
# singular values equal to 1.

# %%
import numpy as np

from rectfree.measure import bernoulli
from rectfree.rmt import mc_convolution, null_ratio_trace

nu = bernoulli()

# %%
rep = mc_convolution(nu, nu, q1=150, q2=300, trials=50, rng_seed=42, n_moments=3)
for order, emp, se, pred, z in zip(rep.orders, rep.empirical, rep.stderr, rep.predicted, rep.zscores):
    print(f"m_{order}: empirical {emp:.4f} +- {se:.4f}, theory {pred:.4f}, z = {z:+.2f}")

# %% [markdown]
# ## Words in the two matrices
# When q1 / q2 goes to zero, the normalized trace of M1* M2 M1* M2
# vanishes.  In the square case it also vanishes in the limit, since the
# word alternates between free unitaries; at finite size it fluctuates at
# the scale 1 / q1.

# %%
for q1, q2 in ((50, 2000), (200, 200)):
    st = null_ratio_trace(q1, q2, "M1* M2 M1* M2", trials=100, rng_seed=7)
    print(f"q1={q1:4d} q2={q2:5d}: mean |tr| = {st.mean_abs:.2e}, mean tr = {st.mean_trace:.2e}")
