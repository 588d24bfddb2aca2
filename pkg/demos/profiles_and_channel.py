"""Walk through the heat profiles and watch the noise level respond to a burst of power."""

import numpy as np

from heatchannel import HeatProfile, HeatingChannel, NotSummable, classify
from heatchannel.profiles import alpha_subsampled, alpha_sum

profiles = [
    HeatProfile.geometric(0.5),
    HeatProfile.subgeometric(0.5, 2.0),
    HeatProfile.even_ones(),
    HeatProfile.odd_ones(),
    HeatProfile.explicit([0.8, 0.3, 0.1]),
]



def total(fn, p):
    try:
        return fn(p)
    except NotSummable:
        return float("nan")


print(f"{'profile':32s} {'alpha':10s} {'alpha^(2)':10s} verdict")
for p in profiles:
    a, a2 = total(alpha_sum, p), total(lambda q: alpha_subsampled(q, 2), p)
    c = classify(p)
    note = f" ({c.annotation.value})" if c.annotation else ""
    print(f"{p.label():32s} {a:<10.4g} {a2:<10.4g} {c.verdict.value}{note}")

# ten symbols at amplitude 3, then silence
x = np.concatenate([np.full(10, 3.0), np.zeros(20)])
ch = HeatingChannel(HeatProfile.geometric(0.7), sigma2=1.0, seed=0)
tx = ch.transmit(x)
print("\nnoise standard deviation during and after the burst (geometric, rho=0.7):")
print(np.round(tx.theta, 3))
