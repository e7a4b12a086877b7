# %% [markdown]
# # Rectangular cumulants, two ways
#
# Rectangular cumulants linearize the rectangular free convolution.  They
# are tied to the even moments through sums over NC'(2n), the non-crossing
# partitions of {1, ..., 2n} whose blocks all have even size, with each
# block whose smallest element is even weighted by the ratio lam.
#
# This script compares the brute-force partition sum with the power-series
# engine that the rest of the package uses.

# %%
from fractions import Fraction

from rectfree.ncpart import e_stat, enumerate_ncprime, moments_from_cumulants_oracle
from rectfree.series import cumulants_from_moments, moments_from_cumulants

# %% [markdown]
# ## The partitions themselves
# NC'(4) has three elements.  The statistic e counts blocks with an even
# minimum.

# %%
for p in enumerate_ncprime(2):
    print(p.blocks, "e =", e_stat(p))

# %% [markdown]
# ## Partition sums against the series engine
# With exact rational input both routes agree to the last digit.

# %%
lam = Fraction(1, 3)
c = [Fraction(1), Fraction(-1, 2), Fraction(2, 7), Fraction(0), Fraction(5, 3)]
oracle = moments_from_cumulants_oracle(c, lam, 5)
series = moments_from_cumulants(c, lam, 5)
print("partition sums:", [str(v) for v in oracle])
print("series engine: ", [str(v) for v in series])
assert oracle == series

# %% [markdown]
# ## Cumulants of the symmetric Bernoulli law
# All even moments equal 1.  Its leading cumulants at lam = 0.3 are
# 1, -0.3 and 0.18.

# %%
print(cumulants_from_moments([Fraction(1)] * 5, Fraction(3, 10), 5))
