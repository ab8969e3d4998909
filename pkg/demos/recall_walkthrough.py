"""Store one pattern, corrupt it, and watch the somata pull it back.

Run with ``python demos/recall_walkthrough.py``.  Takes a few seconds.
"""

import numpy as np

from spinhop import SimConfig, run_trial, train_hebbian
from spinhop.device import DeviceParams
from spinhop.tasks import distort

params = DeviceParams()
rng = np.random.default_rng(3)

n = 16
pattern = rng.integers(0, 2, n)
weights = train_hebbian([pattern])

# two flipped bits out of sixteen
noisy = distort(pattern, 2 / n, seed=11)
print("stored :", "".join(map(str, pattern)))
print("input  :", "".join(map(str, noisy)))

report = run_trial(weights, noisy, params, SimConfig(trace_every=500))
print("output :", "".join(map(str, report.final_bits)))
print(f"settled after {report.t_converge * 1e9:.1f} ns, "
      f"{report.energy_total * 1e12:.0f} pJ from the supplies "
      f"({report.chargeup_energy / report.energy_total:.0%} spent writing the input)")

# the trace holds soma positions every 500 steps; print a coarse picture
lo, hi = params.window
print("\nsoma walls during the first few ns (. = OFF side, | = inside MTJ window, # = ON side)")
for t, row in zip(report.trace_t[:18:2], report.trace[:18:2]):
    marks = "".join("#" if x > hi else "." if x < lo else "|" for x in row)
    print(f"{t * 1e9:7.1f} ns  {marks}")
