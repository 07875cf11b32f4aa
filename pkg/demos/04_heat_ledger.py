#!/usr/bin/env python3
"""Heat ledger of a driven qubit exchanging energy with a thermal qubit.

The composite system+environment pair evolves exactly and unitarily; the
ledger reads the reduced system state after every step and accounts the heat
dissipated per step. The work obeys W = dU - Q, equals the Hamiltonian
increment form, and equals the first moment of the work-counting
characteristic function.
"""

import numpy as np

from qworkstats import (
    CompositeModel,
    eigenstate_density,
    gap_ramp_protocol,
    gibbs_state,
    heat_ledger,
    open_characteristic_function,
    qubit_exchange_environment,
    work_via_increments,
)
from qworkstats.fcs import fd_stencil_grid, moment_fd

N = 96
protocol = gap_ramp_protocol(0.8, 1.2, 6.0)
h_env, h_se = qubit_exchange_environment(0.8)  # resonant with the initial gap
model = CompositeModel(protocol, h_env, h_se, coupling_scale=0.05)
rho_s = eigenstate_density(protocol(0.0), 1)  # excited system
rho_e = gibbs_state(h_env, 1.0)

ledger = heat_ledger(model, rho_s, rho_e, N)

print("per-step heat (every 8th step):")
print(f"{'k':>4} {'t_k':>8} {'Q_k':>14} {'cumulative Q':>14}")
cumulative = 0.0
for row in ledger.rows:
    cumulative += row.heat
    if row.k % 8 == 0:
        print(f"{row.k:>4} {row.time:>8.3f} {row.heat:>+14.3e} {cumulative:>+14.6f}")

print("\ntotals:")
print(f"  dU                 = {ledger.internal_energy_change:+.10f}")
print(f"  Q (into system)    = {ledger.heat:+.10f}")
print(f"  W = dU - Q         = {ledger.work:+.10f}")

increments = work_via_increments(model, rho_s, rho_e, N)
print(f"  Hamiltonian-increment form of W = {increments:+.10f}")
print(f"  |difference| = {abs(increments - ledger.work):.2e}")

h = 1e-3
samples = open_characteristic_function(
    model, rho_s, rho_e, N, fd_stencil_grid(h, order=1, richardson=True)
)
fd_work = moment_fd(samples, 1, h=h)
print(f"  first moment of the counting function = {fd_work:+.10f}")
print(f"  |difference from ledger W| = {abs(fd_work - ledger.work):.2e}")

print("\nsanity limits:")
decoupled = CompositeModel(protocol, h_env, h_se, coupling_scale=0.0)
led0 = heat_ledger(decoupled, rho_s, rho_e, N)
print(f"  g = 0: max |Q_k| = {np.max(np.abs(led0.heat_increments)):.2e} (no dissipation)")
from qworkstats import constant_protocol, cyclic_qubit_hamiltonian

static = CompositeModel(
    constant_protocol(cyclic_qubit_hamiltonian(0.8), 6.0), h_env, h_se, coupling_scale=0.05
)
led_c = heat_ledger(static, rho_s, rho_e, N)
print(f"  constant drive: W = {led_c.work:+.2e}, dU - Q = {led_c.internal_energy_change - led_c.heat:+.2e}")
