#!/usr/bin/env python3
"""Counting on the environment vs counting on the system.

For a constant system Hamiltonian, kicks on the environment energy generate
the same statistics as mirrored kicks on the system energy, up to first order
in the coupling. The residual deviation between the two characteristic
functions shrinks linearly as the coupling is halved -- provided the initial
state carries coherences in both factors and the environment is detuned,
otherwise the first-order term vanishes identically and the agreement is even
better (second order).
"""

import numpy as np

from qworkstats import (
    CompositeModel,
    constant_protocol,
    cyclic_qubit_hamiltonian,
    duality_deviation,
    eigenstate_density,
    gibbs_state,
    pure_state_density,
    qubit_exchange_environment,
    symmetric_grid,
)

protocol = constant_protocol(cyclic_qubit_hamiltonian(1.0), 3.0)
grid = symmetric_grid(3.0, 21)
plus = pure_state_density(np.array([1.0, 1.0]) / np.sqrt(2.0))

print("detuned environment (gap 1.8), coherent system and environment states:")
print(f"{'coupling g':>12} {'max |Gbar - G|':>16} {'ratio':>8}")
h_env, h_se = qubit_exchange_environment(1.8)
previous = None
for g in (0.1, 0.05, 0.025, 0.0125):
    model = CompositeModel(protocol, h_env, h_se, coupling_scale=g)
    dev = duality_deviation(model, plus, plus, 48, grid)
    ratio = "" if previous is None else f"{previous / dev:8.3f}"
    print(f"{g:>12.4f} {dev:>16.6e} {ratio:>8}")
    previous = dev
print("-> halving the coupling halves the deviation: the duality holds to O(g)\n")

print("same model with bare-energy-diagonal states (excited system, thermal env):")
print(f"{'coupling g':>12} {'max |Gbar - G|':>16} {'ratio':>8}")
rho_s = eigenstate_density(protocol(0.0), 1)
rho_e = gibbs_state(h_env, 1.0)
previous = None
for g in (0.1, 0.05, 0.025):
    model = CompositeModel(protocol, h_env, h_se, coupling_scale=g)
    dev = duality_deviation(model, rho_s, rho_e, 48, grid)
    ratio = "" if previous is None else f"{previous / dev:8.3f}"
    print(f"{g:>12.4f} {dev:>16.6e} {ratio:>8}")
    previous = dev
print("-> the first-order term vanishes for diagonal states; the residual is O(g^2)\n")

print("resonant exchange (gap 1.0), diagonal states:")
h_env_res, h_se_res = qubit_exchange_environment(1.0)
rho_e_res = gibbs_state(h_env_res, 1.0)
for g in (0.1, 0.025):
    model = CompositeModel(protocol, h_env_res, h_se_res, coupling_scale=g)
    dev = duality_deviation(model, rho_s, rho_e_res, 48, grid)
    print(f"  g = {g:<6}: deviation {dev:.2e}")
print("-> at exact resonance the exchange coupling conserves bare energy and the")
print("   duality becomes exact for diagonal states, at any coupling strength")
