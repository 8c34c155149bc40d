#!/usr/bin/env python3
"""
Shows how much harvested current survives when the surface only supports a
few discrete phase levels. Optimize with continuous phases, snap them to a
b-bit grid, re-fit the waveform to the snapped surface, and compare.
"""
import numpy as np

from irswpt.channel import Layout, generate_realization
from irswpt.optimize import (
    QuantizationScheme,
    quantize_phases,
    refit_waveform,
    run_su_fs,
)
from irswpt.rectenna import SystemConfig

cfg = SystemConfig(n_subcarriers=16, n_elements=20, n_users=1)
rng = np.random.default_rng(99)

ratios = {bits: [] for bits in (1, 2, 3, 4)}
for trial in range(20):
    real = generate_realization(cfg, Layout(), rng)
    run = run_su_fs(real, cfg)
    continuous = run.trace[-1]
    for bits in ratios:
        snapped = quantize_phases(run.phases, QuantizationScheme(bits))
        refit = refit_waveform(real, snapped, cfg)
        ratios[bits].append(refit.trace[-1] / continuous)

print("phase levels vs fraction of continuous-phase current (20 channels):")
for bits, vals in ratios.items():
    arr = np.array(vals)
    print(f"  {bits} bit ({2 ** bits:2d} levels): "
          f"mean {arr.mean():6.1%}, worst {arr.min():6.1%}")
