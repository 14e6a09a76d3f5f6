"""Checking the subspace-estimation requirements on the virtual array."""

import numpy as np

from irs_aoa import ArrayGeometry, VirtualManifold, condition_diagnostics, generate_irs_patterns

rng = np.random.default_rng(3)
thetas = [100.0, 128.0, 151.0]
geom = ArrayGeometry(128)

cases = {
    "random patterns, L=6": generate_irs_patterns(128, 6, rng),
    "one pattern repeated, L=6": np.tile(generate_irs_patterns(128, 1, rng), (6, 1)),
    "random patterns, L=3": generate_irs_patterns(128, 3, rng),
}
for name, patterns in cases.items():
    rep = condition_diagnostics(VirtualManifold(135.0, patterns, geom), thetas)
    print(f"{name:28s} L>K={rep.dimension_ok!s:5s} rank={rep.rank} ok={rep.ok}")

# a pattern sequence that changes between blocks breaks time invariance
patterns = generate_irs_patterns(128, 6, rng)
stream = np.vstack([patterns, generate_irs_patterns(128, 6, rng)])
rep = condition_diagnostics(VirtualManifold(135.0, patterns, geom), thetas, pattern_stream=stream)
print(f"{'patterns redrawn per block':28s} periodic={rep.periodic} ok={rep.ok}")
