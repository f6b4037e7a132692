"""Exact reference solvers.

* :func:`fermionic_ed` diagonalises the original Hubbard model in the
  occupation-number basis with explicit anticommutation signs.  It shares
  no code with the encoder.
* :func:`free_fermion_energy` fills single-particle levels of the
  open-boundary hopping matrix.
* :func:`deformed_ed` diagonalises the encoded qubit Hamiltonian, either
  inside the stabilizer sector (exact) or in the full register with
  energy penalties.
* :func:`sector_projected_evolution` propagates sector states exactly with
  a Krylov-type action of the matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .encoder import EncodedHamiltonian, ModelParams, build_hamiltonian, stabilizers, vertex_penalty
from .lattice import LatticeSpec, QubitLayout, enumerate_lattice
from .pauli import PauliString, PauliSum, to_sparse
from .sector import SECTOR_DIM_CAP, SectorBasis, SectorError

__all__ = [
    "SpectrumResult",
    "FERMION_MODE_CAP",
    "DEFORMED_QUBIT_CAP",
    "DENSE_EIG_CAP",
    "fermionic_hamiltonian",
    "fermionic_ed",
    "free_fermion_energy",
    "deformed_ed",
    "sector_projected_evolution",
    "double_occupancy",
    "lowest_eigenpairs",
]

FERMION_MODE_CAP = 16
DEFORMED_QUBIT_CAP = 14
DENSE_EIG_CAP = 1024
DEGENERACY_TOL = 1e-9


@dataclass
class SpectrumResult:
    """Ground-state data of an exact diagonalisation.

    Attributes
    ----------
    groundEnergy : float
    groundState : ndarray
        Normalised amplitudes in the solver's basis (occupation basis,
        full register, or sector coordinates).
    degeneracy : int
        Number of computed levels within ``1e-9`` of the ground energy.
    basis : SectorBasis or None
        Set for sector-projected results.
    """

    groundEnergy: float
    groundState: np.ndarray
    degeneracy: int
    basis: SectorBasis | None = None


def lowest_eigenpairs(H, k: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Lowest eigenvalues/vectors of a Hermitian (sparse) matrix.

    Dense ``eigh`` is used up to :data:`DENSE_EIG_CAP`, Lanczos
    (``eigsh``) above.
    """
    dim = H.shape[0]
    if dim <= DENSE_EIG_CAP:
        dense = H.toarray() if sp.issparse(H) else np.asarray(H)
        w, v = la.eigh(dense)
        return w[:k], v[:, :k]
    k = min(k, dim - 2)
    w, v = spla.eigsh(H, k=k, which="SA", tol=1e-13)
    order = np.argsort(w)
    return w[order], v[:, order]


def _spectrum(H, basis=None) -> SpectrumResult:
    w, v = lowest_eigenpairs(H)
    e0 = float(w[0])
    deg = int(np.sum(np.abs(w - e0) < DEGENERACY_TOL))
    return SpectrumResult(e0, v[:, 0], deg, basis)


# --------------------------------------------------------------------------
# fermionic reference
# --------------------------------------------------------------------------

def _popcount(v: np.ndarray) -> np.ndarray:
    return np.bitwise_count(v).astype(np.int64)


def fermionic_hamiltonian(
    spec: LatticeSpec, params: ModelParams, mode_order: Sequence[int] | None = None
) -> sp.csr_matrix:
    """Hubbard model ``-t sum c^dag c + U sum (n_u - 1/2)(n_d - 1/2)`` (+ number penalty).

    Modes are labelled ``2*site + flavor`` (site row-major, up before down);
    ``mode_order`` optionally permutes their position in the Jordan-Wigner
    ordering (``mode_order[m]`` is the bit used for mode ``m``).
    """
    sites, links, _ = enumerate_lattice(spec)
    M = 2 * len(sites)
    if M > FERMION_MODE_CAP:
        raise ValueError(f"{M} fermion modes exceed the cap of {FERMION_MODE_CAP}")
    order = list(range(M)) if mode_order is None else list(mode_order)
    if sorted(order) != list(range(M)):
        raise ValueError("mode_order must be a permutation")
    sidx = {s: i for i, s in enumerate(sites)}
    dim = 1 << M
    states = np.arange(dim, dtype=np.int64)
    occ = lambda m: (states >> order[m]) & 1  # noqa: E731

    diag = np.zeros(dim)
    for i in range(len(sites)):
        diag += params.U * (occ(2 * i) - 0.5) * (occ(2 * i + 1) - 0.5)
    if params.Ntarget is not None:
        diag += params.muTilde * (_popcount(states) - params.Ntarget) ** 2
    rows, cols, data = [np.arange(dim)], [np.arange(dim)], [diag]

    for link in links:
        a, b = sidx[link.start], sidx[link.end]
        for f in (0, 1):
            for i, j in ((2 * a + f, 2 * b + f), (2 * b + f, 2 * a + f)):
                # c_i^dag c_j : needs j occupied, i empty
                bi, bj = order[i], order[j]
                sel = states[(((states >> bj) & 1) == 1) & (((states >> bi) & 1) == 0)]
                lo, hi = min(bi, bj), max(bi, bj)
                between = ((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1)
                sign = 1 - 2 * (_popcount(sel & between) & 1)
                rows.append(sel ^ (1 << bi) ^ (1 << bj))
                cols.append(sel)
                data.append(-params.t * sign)
    return sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def fermionic_ed(
    spec: LatticeSpec, params: ModelParams, mode_order: Sequence[int] | None = None
) -> SpectrumResult:
    """Exact ground state of the fermionic Hubbard model (plus number penalty)."""
    return _spectrum(fermionic_hamiltonian(spec, params, mode_order))


def free_fermion_energy(spec: LatticeSpec, t: float, N: int) -> float:
    """Ground energy of ``N`` spinful free fermions with open boundaries."""
    sites, links, _ = enumerate_lattice(spec)
    idx = {s: i for i, s in enumerate(sites)}
    A = np.zeros((len(sites), len(sites)))
    for l in links:
        A[idx[l.start], idx[l.end]] = A[idx[l.end], idx[l.start]] = -t
    levels = np.sort(np.repeat(np.linalg.eigvalsh(A), 2))
    if not 0 <= N <= len(levels):
        raise ValueError("particle number out of range")
    return float(levels[:N].sum())


# --------------------------------------------------------------------------
# encoded model
# --------------------------------------------------------------------------

def deformed_ed(
    layout: QubitLayout,
    params: ModelParams,
    mode: str = "projected",
    alpha_vertex: float | None = None,
) -> SpectrumResult:
    """Ground state of the encoded Hamiltonian with penalties.

    Parameters
    ----------
    mode : {"projected", "penalty"}
        ``projected`` diagonalises inside the joint +1 stabilizer sector;
        ``penalty`` works in the full register and adds
        ``-alpha_vertex * (S_v - 1)`` per site (default ``alphaB``).
    """
    if layout.n_qubits > DEFORMED_QUBIT_CAP:
        raise ValueError(f"{layout.n_qubits} qubits exceed the deformed-ED cap {DEFORMED_QUBIT_CAP}")
    ham = build_hamiltonian(layout, params, include_penalties=True)
    if mode == "projected":
        basis = SectorBasis(stabilizers(layout).all)
        return _spectrum(basis.operator(ham.pauli_sum), basis)
    if mode == "penalty":
        alpha = params.alphaB if alpha_vertex is None else alpha_vertex
        total = ham.pauli_sum
        for s in layout.sites:
            total = total + vertex_penalty(layout, s, alpha)
        return _spectrum(to_sparse(total))
    raise ValueError(f"unknown mode {mode!r}")


def _as_sector_matrix(basis: SectorBasis, H) -> sp.spmatrix:
    if isinstance(H, EncodedHamiltonian):
        H = H.pauli_sum
    if isinstance(H, (PauliSum, PauliString)):
        return basis.operator(H)
    return sp.csr_matrix(H)


def sector_projected_evolution(
    basis: SectorBasis,
    H,
    state: np.ndarray,
    tau: float | Sequence[float],
    outside_tol: float = 1e-10,
):
    """Exact ``exp(-i H tau) |state>`` inside the stabilizer sector.

    Parameters
    ----------
    basis : SectorBasis
    H : EncodedHamiltonian, PauliSum or sparse matrix in sector coordinates
    state : ndarray
        Sector coordinates (length ``basis.dim``) or a full-register vector,
        which must lie in the sector up to ``outside_tol``.
    tau : float or increasing sequence of floats
        A sequence returns the stacked states at each time.

    Returns
    -------
    ndarray
    """
    if basis.dim > SECTOR_DIM_CAP:
        raise SectorError("sector dimension above cap")
    state = np.asarray(state, dtype=complex)
    if state.shape == (basis.dim,):
        coeffs = state
    elif state.shape == (1 << basis.n,):
        coeffs, outside = basis.project(state)
        if outside > outside_tol:
            raise SectorError(f"state has norm {outside:.3e} outside the stabilizer sector")
    else:
        raise ValueError("state length matches neither the sector nor the register")
    A = -1j * _as_sector_matrix(basis, H)
    if np.ndim(tau) == 0:
        if tau == 0:
            return coeffs.copy()
        return spla.expm_multiply(A * tau, coeffs)
    taus = np.asarray(tau, dtype=float)
    out = np.empty((len(taus), basis.dim), dtype=complex)
    prev_t, cur = 0.0, coeffs
    for k, t in enumerate(taus):
        if t < prev_t:
            raise ValueError("times must be nondecreasing")
        if t > prev_t:
            cur = spla.expm_multiply(A * (t - prev_t), cur)
        out[k] = cur
        prev_t = t
    return out


def double_occupancy(layout: QubitLayout, state: np.ndarray, basis: SectorBasis | None = None) -> float:
    """Site average of ``<n_u n_d> = <(1 - Z_u)(1 - Z_d)>/4``."""
    n = layout.n_qubits
    terms = []
    for s in layout.sites:
        u, d = layout.matter(s, "u"), layout.matter(s, "d")
        terms += [
            (0.25, PauliString.identity(n)),
            (-0.25, PauliString.single(n, u, "Z")),
            (-0.25, PauliString.single(n, d, "Z")),
            (0.25, PauliString.from_ops(n, {u: "Z", d: "Z"})),
        ]
    op = PauliSum(n, terms)
    if basis is not None:
        return basis.expectation(op, state) / len(layout.sites)
    probs = np.abs(np.asarray(state)) ** 2
    idx = np.arange(len(probs), dtype=np.int64)
    total = 0.0
    for s in layout.sites:
        u, d = layout.matter(s, "u"), layout.matter(s, "d")
        total += probs[((idx >> u) & 1 & (idx >> d)) == 1].sum()
    return float(total / len(layout.sites))
