"""Physical constants (SI) used across the package.

Values follow the 2018 CODATA recommendations.
"""

from __future__ import annotations

# Planck constant [J s] (exact by SI definition)
H_PLANCK = 6.62607015e-34
# Reduced Planck constant [J s]
HBAR = 1.054571817e-34
# Speed of light in vacuum [m/s] (exact)
C_LIGHT = 2.99792458e8
# Vacuum permittivity [F/m]
EPSILON_0 = 8.8541878128e-12
# Mass of a rubidium-87 atom [kg]
M_RB87 = 1.44316060e-25

# Default electric-dipole matrix element [C m] for the alkali D2-line probe
# used in the worked examples.  The value is fixed by requiring that the
# default coupling reproduce chi = 3.23e-10 at detuning 2.28e10 s^-1 with
# linewidth 3.8e7 s^-1, probe frequency 2.414e15 s^-1 and beam cross-section
# 3e-7 m^2 (see core.dipole_from_coupling for the inversion).
D_DIPOLE_DEFAULT = 1.600603000731352e-29
