"""Recover 10x10 glyphs from growing amounts of pixel noise.

All three built-in glyphs are stored in one 100-neuron network.  Each noise
level runs a handful of trials, so expect roughly half a minute.
"""

import numpy as np

from spinhop import run_trial, train_hebbian
from spinhop.tasks import distort, fixture_images, image_experiment, pixel_error

images = fixture_images()
weights = train_hebbian([im.ravel() for im in images])


def show(bits):
    return ["".join("#" if b else "." for b in row) for row in np.asarray(bits).reshape(10, 10)]


# one worked example first
target = images[1].ravel()
noisy = distort(target, 0.1, seed=4)
out = run_trial(weights, noisy).final_bits
for a, b, c in zip(show(target), show(noisy), show(out)):
    print(f"{a}   {b}   {c}")
print(f"pixel error after recall: {pixel_error(out, target)}\n")

stats = image_experiment(distortion_levels=[0.05, 0.15, 0.25, 0.35, 0.45], trials_per_level=3)
for level, err in stats.mean_pixel_error.items():
    print(f"noise {level:4.0%}: mean pixel error {err:5.1f}")
