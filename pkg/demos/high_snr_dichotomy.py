"""High SNR: geometric heating caps the rate, faster decay does not.

Codes that only transmit every L-th symbol see the subsampled coefficients;
the achievable rate saturates at log(1 + 1/alpha^(L)) / (2L).
"""

from heatchannel import HeatProfile
from heatchannel.bounds import ach_limit, ach_rate
from heatchannel.codec import bler_sim
from heatchannel.profiles import alpha_subsampled

geo, sub = HeatProfile.geometric(0.5), HeatProfile.subgeometric(0.5, 2.0)
print(" L   geometric limit   subgeometric limit")
for L in (1, 2, 4, 6, 8):
    print(f"{L:2d}   {ach_limit(L, alpha_subsampled(geo, L)):14.4f}   {ach_limit(L, alpha_subsampled(sub, L)):18.4f}")

print("\nachievable rate vs SNR, L=4:")
for snr in (1e1, 1e3, 1e5, 1e7):
    r = [ach_rate(snr, 1.0, 4, alpha_subsampled(p, 4)) for p in (geo, sub)]
    print(f"  snr={snr:8.0e}: geometric {r[0]:.4f}, subgeometric {r[1]:.4f}")

R = 0.5 * (ach_limit(4, alpha_subsampled(geo, 4)) + ach_limit(4, alpha_subsampled(sub, 4)))
for p in (geo, sub):
    rep = bler_sim(p, 1.0, 1e4, 4, 120, R, 300, seed=3, method="ensemble")
    print(f"BLER at R={R:.3f} nats, n=120, L=4, {p.label()}: {rep.estimate:.3g}")
