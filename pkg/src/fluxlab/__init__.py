"""fluxlab: discrete Hamiltonian gauge theory on meshes with boundary.

Constraint/flux decomposition of momentum maps, two-stage symplectic
reduction, flux superselection sectors, and corner Poisson/BRST structure,
all verified by explicit linear algebra at desk scale.
"""

__version__ = "0.1.0"
