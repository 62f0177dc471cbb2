"""Physical constants (2019 SI exact values).

These are fixed by definition and are deliberately not configurable
anywhere in the package.
"""

PLANCK_H = 6.62607015e-34  # J s
BOLTZMANN_K = 1.380649e-23  # J/K

# Noise-figure conventions reference this temperature.
IEEE_T0 = 290.0  # K
