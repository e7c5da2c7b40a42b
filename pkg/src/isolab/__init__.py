"""Simulation laboratory for isotonic regression limit laws.

Subpackages:

- ``paths``: discretized Brownian motion generation
- ``gcm``: convex minorants / concave majorants and slopes
- ``isotonic``: PAVA and the max-min characterization
- ``dgp``: regression scenarios (truths, designs, error laws)
- ``oracle``: oracle local averages, rates, and Gaussian limits
- ``limits``: samplers and cached tables for the non-Gaussian limits
- ``anticonc``: drifted-supremum laws and concentration probes
- ``experiments``: Monte Carlo rate-measurement harness
- ``cli``: command-line front end
"""

__version__ = "0.1.0"

from . import anticonc, dgp, experiments, gcm, isotonic, limits, oracle, paths  # noqa: F401
