# Localized fraction versus alpha, at the array center and near an edge.
from waveguide_arrays.cli import sweep_alpha
from waveguide_arrays.config import parse_config

for m0, strength in ((25, 3.0), (5, 1.0)):
    cfg = parse_config({
        "N": 50, "disorder": {"model": "onsite_gaussian", "strength": strength}, "input": f"single({m0})",
        "ensemble": {"Nr": 200, "seed": 1}, "outputs": ["localized_fraction_sweep"], "alphas": [-2, -1, 0, 1, 2],
    })
    print(f"m0={m0}, strength={strength}")
    for row in sweep_alpha(cfg, cfg.alphas):
        print(f"  alpha={row['alpha']:+.0f}  bandwidth={row['bandwidth']:9.3f}  fraction={row['fraction']:.3f} +- {row['stderr']:.3f}")
