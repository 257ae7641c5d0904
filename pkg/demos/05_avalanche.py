"""The avalanche principle on random chains of hyperbolic matrices.

For a chain B_1..B_m with norms at least mu and consecutive pairs not much
weaker than their factors, log||B_m...B_1|| is determined by the norms of
single factors and adjacent pairs, up to an error of order m/mu.
"""

import numpy as np

from qpcocycle.products import avalanche_check, random_chain

rng = np.random.default_rng(7)
for ensemble in ("aligned", "rotated", "random"):
    ratios = []
    for _ in range(200):
        chain = random_chain(rng, 16, 1e4, ensemble)
        ratios.append(avalanche_check(chain, 1e4).ratio)
    print(f"{ensemble:8s}  defect / (m/mu): median {np.median(ratios):.2e}  max {max(ratios):.2e}")
