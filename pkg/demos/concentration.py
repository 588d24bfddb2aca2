"""Grid outputs concentrate around their exact finite-length mean."""

from heatchannel import HeatProfile
from heatchannel.estimate import concentration_check, typical_means

prof, P, L = HeatProfile.geometric(0.5), 4.0, 2
for n in (100, 1_000, 10_000, 100_000):
    my, mz = typical_means(prof, P, 1.0, L, n)
    print(f"n={n:>6d}: mean |Y|^2/m = {my:.6f}, mean |Z|^2/m = {mz:.6f}")

eps = 0.05 * 19 / 3
for n in (1_000, 10_000, 100_000):
    r = concentration_check(prof, P, 1.0, L, n, eps, trials=100, seed=0)
    print(f"n={n:>6d}: typical-set frequency {r.empirical_prob:.3f} +/- {r.stderr:.3f}")
