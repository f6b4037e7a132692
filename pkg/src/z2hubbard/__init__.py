"""Local Z2-gauge encoding of the two-dimensional Fermi-Hubbard model.

Modules
-------
lattice    sites, links, plaquettes and the merged qubit layout
pauli      phase-tracked Pauli strings, sums and the rishon link merge
encoder    Majorana-to-Pauli mapping, Hamiltonian terms and stabilizers
sector     orthonormal basis of the joint +1 stabilizer eigenspace
oracle     exact diagonalisation and sector-projected time evolution
circuit    gate-level propagators, Trotter steps, stabilizer measurements
emulator   dense statevector emulator (compiled kernels, numpy fallback)
protocols  state preparation, excitation injection and observable tracking
cli        the ``z2hubbard`` command
"""

from .encoder import ModelParams, build_hamiltonian, stabilizers
from .lattice import LatticeSpec, Site, build_layout

__version__ = "0.1.0"
__all__ = ["LatticeSpec", "Site", "build_layout", "ModelParams", "build_hamiltonian", "stabilizers", "__version__"]
