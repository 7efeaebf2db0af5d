r"""One circuit for many Hamiltonians
====================================

If a problem instance is solved by ``U_orig`` but the hardware prefers a
different circuit ``U_fixed``, the instance's Hamiltonian can be conjugated
by ``D = U_orig U_fixed^dag`` so that ``U_fixed`` reproduces the same energy.
The dressed Hamiltonian is still a Pauli sum, usually a longer one.

Run with ``python demos/dressing_tour.py``.
"""

from noisefloor.experiments import dressing_study, primitive_points
from noisefloor.pauli import PauliRotation

points = primitive_points((0.2, 0.6, 1.0), seed=1)
fixed = [PauliRotation.parse(0.401, "YXXX")]
rec = dressing_study(points, fixed, "1100", noise=0.01, model="local_per_gate", shots_per_basis=500)

for row in rec.rows:
    print(f"{row['point']:14s} terms {row['terms']:2d} -> {row['dressed_terms']:2d}   "
          f"exact {row['exact_energy']:+.4f}   dressed noiseless {row['dressed_noiseless_energy']:+.4f}   "
          f"shadow {row['dressed_shadow_energy']:+.4f} +/- {row['dressed_shadow_stderr']:.4f}")
print(f"distinct words measured with reuse: {rec.stats['measured_words_with_reuse']}, "
      f"without: {rec.stats['measured_words_without_reuse']}")
