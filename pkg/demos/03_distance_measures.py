"""
How far from memoryless: distance measures on the decay
========================================================

With the reservoir widths tuned so every family matches the memoryless
half-life, the remaining disagreement between the structured and the
memoryless states is pure memory. This script builds the full
comparison for a single qubit and summarizes what each distance
measure sees.
"""

import numpy as np

from chainqsd import (
    ChainConfig,
    Lorentzian,
    LorentzianSquared,
    Ohmic,
    Scenario,
    decay_time,
    run_scenario,
)

# widths from the calibration demo (05); each family matches the
# memoryless half-life 34.66 on [0, 200]
sc = Scenario(
    chain=ChainConfig(n_qubits=1, coupling=1.0, omega_e=10.0),
    markovian_gamma=0.01,
    reservoirs=(
        ("narrow", Lorentzian(g=1.0, gamma=0.039804687500000005)),
        ("squared", LorentzianSquared(g=1.0, gamma=0.44638671875)),
        ("broad", Ohmic(g=1.0, s_param=1.5, omega_c=30.78125, omega_eg=10.0)),
    ),
    measures=("trace", "hellinger", "bures"),
    t_end=200.0,
    n_samples=4096,
)
rec = run_scenario(sc)

print(f"{'reservoir':10s} {'mean trace':>11s} {'peak trace':>11s} {'decay time':>11s}")
for tag in ("narrow", "squared", "broad"):
    v = rec.result(tag).qsd["trace"].values
    mean = np.trapezoid(v, rec.times) / rec.times[-1]
    print(f"{tag:10s} {mean:11.5f} {v.max():11.5f} {decay_time(rec.times, v):11.2f}")

print()
print("the broad reservoir tracks the memoryless evolution closely the")
print("whole way; both peaked families swing far from it and ring.")
print()

# Hellinger and Bures ride on the same square-root overlap, and for a
# single qubit the two are numerically indistinguishable
for tag in ("narrow", "squared", "broad"):
    h = rec.result(tag).qsd["hellinger"].values
    b = rec.result(tag).qsd["bures"].values
    print(f"{tag:10s} max |hellinger - bures| = {np.max(np.abs(h - b)):.2e}")
