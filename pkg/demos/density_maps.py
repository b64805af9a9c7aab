"""
Density maps of two correlated counts
=====================================

A bivariate Gaussian KDE on a 100 x 100 grid, split by label, written
as SVG heatmaps into the current directory.
"""

from pathlib import Path

import numpy as np

from bagforest.analysis import kde_1d, kde_2d, svg_heatmap

rng = np.random.default_rng(1)
label = (rng.random(400) < 0.3).astype(int)
left = rng.poisson(5 + 6 * label).astype(float)
right = left + rng.normal(0, 1.5, 400)

grids = kde_2d(left, right, by_label=label)
for lab, g in grids.items():
    print(f"label {lab}: bandwidths {g.bandwidths[0]:.2f}, {g.bandwidths[1]:.2f}  mass {g.mass():.5f}")
    Path(f"density_label{lab}.svg").write_text(svg_heatmap(g.density, origin="lower"))

###############################################################################
# The 1-D version of the same column for both labels together.

g = kde_1d(left)
peak = g.axes[0][np.argmax(g.density)]
print(f"1-D mode near {peak:.2f}, mass {g.mass():.5f}")
