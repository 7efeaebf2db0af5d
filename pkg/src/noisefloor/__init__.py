"""Noise floor, magic and correlations of noisy Pauli product states.

Subpackages and modules:

- :mod:`noisefloor.pauli`: symplectic Pauli algebra and Hamiltonian dressing.
- :mod:`noisefloor.densesim`: density-matrix circuit simulation with depolarizing noise.
- :mod:`noisefloor.metrics`: purity, stabilizer 2-Renyi entropy, multipartite QMI,
  purification and coherent mismatch, plus correlation statistics.
- :mod:`noisefloor.shadows`: simulated classical shadows with parity postselection.
- :mod:`noisefloor.experiments`: drivers for the numerical studies.
"""

__version__ = "0.1.0"
