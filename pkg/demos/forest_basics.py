"""
Growing a bagged forest
=======================

Two Gaussian classes are split into train and test parts, a forest of
100 trees is grown on the train part, and its out-of-bag estimate is
compared with held-out accuracy.
"""

import numpy as np

from bagforest import Dataset, ForestConfig, fit, stratified_split
from bagforest.tree import default_depth, leaves

rng = np.random.default_rng(0)
y = (rng.random(600) < 0.35).astype(int)
X = rng.normal(size=(600, 8))
X[:, :3] += 1.5 * y[:, None]
data = Dataset(tuple(f"f{i}" for i in range(8)), X, y)

split = stratified_split(data, test_fraction=0.25, seed=42)
print("train/test rows:", split.train.n_rows, split.test.n_rows)

###############################################################################
# Depth defaults to ceil(log2 n_train) and each split looks at floor(sqrt(8))
# candidate features.

model = fit(split.train, ForestConfig(n_estimators=100, seed=42))
print("depth used:", model.config.max_depth, "=", default_depth(split.train.n_rows))
print("features per split:", model.config.features_per_split)
print("leaves in first tree:", len(leaves(model.trees[0])))

###############################################################################
# The OOB score only uses trees that never saw a row, so it should land near
# the held-out accuracy without touching the test set.

held_out = np.mean(model.predict(split.test.rows) == split.test.labels)
print(f"OOB {model.oob_score:.3f}  held-out {held_out:.3f}")

###############################################################################
# Growth is seeded per tree, so any worker count yields the same model.

from bagforest import forest

same = fit(split.train, ForestConfig(n_estimators=100, seed=42), n_jobs=2)
print("identical across jobs:", forest.dumps(same) == forest.dumps(model))
