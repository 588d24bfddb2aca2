"""Low-SNR behaviour: on-off lower bound per unit SNR against the unit-cost slope.

The block on-off scheme sends one loud symbol followed by L-1 silent ones, so
the heat it leaves behind is read as extra signal.  At fixed amplitude the
bound per unit SNR tends to gain - penalty only as the SNR goes to zero fast
enough for the on-probability to be tiny against exp(-amplitude).
"""

from heatchannel import HeatProfile
from heatchannel.bounds import fb_upper, unit_cost
from heatchannel.estimate import slope_estimate

prof = HeatProfile.geometric(0.5)
for L, x in [(4, 20.0), (16, 20.0), (64, 1e4)]:
    grid = [1e-4, 1e-6, 1e-8, 1e-10, 1e-12] if x < 100 else [1e-2, 1e-3, 1e-4]
    rep = slope_estimate(prof, 1.0, grid, L, x, trials=20_000, seed=1)
    print(f"L={L:3d} amplitude^2={x:g}: per-unit-SNR estimates {[round(r, 4) for r in rep.extras['ratios']]}")
    print(f"    gain - penalty {rep.extras['gain_minus_penalty']:.4f}, unit cost {rep.extras['unit_cost']:.4f}")

print("\nupper bound per unit SNR, alpha = 1:")
for snr in (1e-1, 1e-2, 1e-4):
    print(f"  snr={snr:g}: {fb_upper(snr, 1.0) / snr:.6f} (limit {unit_cost(1.0)})")
