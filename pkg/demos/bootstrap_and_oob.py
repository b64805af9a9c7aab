"""
How much of the data does a bootstrap sample see?
=================================================

Drawing n rows with replacement leaves each row out with probability
(1 - 1/n)^n, which tends to 1/e. The unique fraction of a sample
therefore sits near 0.632.
"""

import math

import numpy as np

from bagforest.forest import bootstrap_sample, oob_exclusion_probability
from bagforest.rng import stream

for n in (2, 10, 100, 10_000, 1_000_000):
    print(f"n={n:>9}  P(excluded)={oob_exclusion_probability(n):.6f}")
print(f"limit 1/e       {math.exp(-1):.6f}")

###############################################################################
# Empirical check over a handful of seeds.

fracs = [len(np.unique(bootstrap_sample(10_000, stream(s, "tree", 0)))) / 10_000 for s in range(20)]
print(f"unique fraction: mean {np.mean(fracs):.4f}, range {min(fracs):.4f}..{max(fracs):.4f}")
