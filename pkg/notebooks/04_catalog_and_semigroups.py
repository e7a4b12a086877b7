# %% [markdown]
# # The closed-form catalog
#
# Several families are closed under the rectangular free convolution
# because their transforms are linear in a parameter.  For the Gaussian
# analogue C(z) = sigma2 z, so the variances add.

# %%
import numpy as np

from rectfree.analytic import H_from_transform
from rectfree.closedforms import catalog_entry, default_catalog
from rectfree.conv import convolve_moments

lam = 0.5

# %%
for e in default_catalog(lam):
    print(e.family, e.params, e.formulas.get("C"))

# %% [markdown]
# ## Gaussian semigroup at the level of moments

# %%
g = lambda s2: catalog_entry("rect_gaussian", lam, sigma2=s2).measure()  # noqa: E731
lhs = np.array(convolve_moments(g(0.3), g(0.7), lam, 5), float)
rhs = np.asarray(g(1.0).moments(5), float)
print("convolved :", lhs)
print("direct    :", rhs)

# %% [markdown]
# ## Tightness near the origin
# Every law here satisfies H(x) / x -> 1 as x -> 0 from below.  The rate
# depends on the tails: heavy-tailed families approach 1 slowly.

# %%
for x in (-1e-2, -1e-4, -1e-6):
    devs = {e.family: abs(complex(H_from_transform(e.C, x)[0]) / x - 1) for e in default_catalog(lam)}
    print(x, {k: f"{v:.1e}" for k, v in devs.items()})
