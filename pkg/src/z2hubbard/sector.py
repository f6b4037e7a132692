"""Explicit basis of the joint +1 eigenspace of a commuting stabilizer group.

The stabilizers are brought into a reduced echelon form over GF(2):
``k`` generators ``G_i`` with linearly independent X parts (each owning a
pivot qubit that no other generator flips) and a set of purely diagonal
constraints.  Every orbit of computational basis states under the group
has a unique representative ``b`` with all pivot bits cleared, and the
normalised sector vectors are

    |v_b> = 2**(-k/2) * prod_i (1 + G_i) |b>,

for representatives ``b`` satisfying the diagonal constraints.  Any Pauli
operator commuting with the group acts on these vectors as a signed
permutation, which is what :meth:`SectorBasis.operator` assembles into a
sparse matrix.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .pauli import PauliString, PauliSum, commutes, multiply, string_action

__all__ = ["SectorBasis", "SectorError", "SECTOR_DIM_CAP", "solve_gf2"]

SECTOR_DIM_CAP = 1 << 17


class SectorError(ValueError):
    """Raised for states or operators incompatible with the stabilizer sector."""


def _parity(v: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(v) & 1).astype(np.int64)


def solve_gf2(n: int, rows: list[tuple[int, int]]) -> tuple[int, list[int]] | None:
    """Solutions of ``parity(mask & b) = rhs`` as (particular, nullspace basis)."""
    pivots: list[tuple[int, int, int]] = []  # (pivot bit, mask, rhs), fully reduced
    for mask, rhs in rows:
        for pbit, pm, pr in pivots:
            if mask >> pbit & 1:
                mask ^= pm
                rhs ^= pr
        if mask == 0:
            if rhs:
                return None
            continue
        pbit = mask.bit_length() - 1
        reduced = []
        for qbit, qm, qr in pivots:
            if qm >> pbit & 1:
                qm ^= mask
                qr ^= rhs
            reduced.append((qbit, qm, qr))
        pivots = reduced + [(pbit, mask, rhs)]
    pivot_bits = {p for p, _, _ in pivots}
    particular = 0
    for pbit, _, pr in pivots:
        if pr:
            particular |= 1 << pbit
    null = []
    for free in range(n):
        if free in pivot_bits:
            continue
        v = 1 << free
        for pbit, pm, _ in pivots:
            if pm >> free & 1:
                v |= 1 << pbit
        null.append(v)
    return particular, null


class SectorBasis:
    """Orthonormal basis of the common +1 eigenspace of ``stabilizers``.

    Parameters
    ----------
    stabilizers : sequence of PauliString
        Mutually commuting Hermitian strings squaring to the identity.
    dim_cap : int
        Largest sector dimension accepted.
    """

    def __init__(self, stabilizers: Sequence[PauliString], dim_cap: int = SECTOR_DIM_CAP):
        stabilizers = list(stabilizers)
        if not stabilizers:
            raise ValueError("empty stabilizer set")
        n = stabilizers[0].n
        for a in stabilizers:
            if not a.is_hermitian:
                raise SectorError(f"stabilizer {a} is not Hermitian")
            for b in stabilizers:
                if not commutes(a, b):
                    raise SectorError("stabilizers do not commute")
        self.n = n
        self.stabilizers = tuple(stabilizers)

        # Reduced echelon form on the X parts; products keep exact phases.
        gens: list[tuple[int, PauliString]] = []  # (pivot bit, generator)
        diag: list[PauliString] = []
        for s in stabilizers:
            for pbit, g in gens:
                if s.x >> pbit & 1:
                    s = multiply(s, g)
            if s.x == 0:
                diag.append(s)
                continue
            pbit = s.x.bit_length() - 1
            gens = [(qb, multiply(g, s) if g.x >> pbit & 1 else g) for qb, g in gens]
            gens.append((pbit, s))
        self.generators = tuple(g for _, g in gens)
        self.pivots = tuple(p for p, _ in gens)

        rows = [(1 << p, 0) for p in self.pivots]
        for d in diag:
            if d.is_identity:
                if d.phase != 0:
                    raise SectorError("stabilizer group contains -1: empty sector")
                continue
            # eigenvalue i^q (-1)^{|z&b|} must be +1
            rows.append((d.z, 0 if d.q % 4 == 0 else 1))
        self.diagonal = tuple(diag)
        sol = solve_gf2(n, rows)
        if sol is None:
            raise SectorError("inconsistent stabilizers: empty sector")
        particular, null = sol
        if len(null) > dim_cap.bit_length() - 1:
            raise SectorError(f"sector dimension 2^{len(null)} exceeds cap {dim_cap}")
        reps = np.array([particular], dtype=np.int64)
        for v in null:
            reps = np.concatenate([reps, reps ^ v])
        self.reps = np.sort(reps)
        self.norm = 2.0 ** (-len(self.generators) / 2)

    @property
    def dim(self) -> int:
        return len(self.reps)

    # basis-state reduction -------------------------------------------------
    def reduce(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map basis states ``c`` to ``(b, lam)`` with ``g|c> = lam |b>``.

        ``b`` is the orbit representative and ``g`` the group element that
        clears the pivot bits; hence ``P_sector |c> = lam * norm * |v_b>``
        when ``b`` is a representative (and zero otherwise).
        """
        c = np.asarray(states, dtype=np.int64).copy()
        lam = np.ones(c.shape, dtype=complex)
        for pbit, g in zip(self.pivots, self.generators):
            hit = (c >> pbit & 1).astype(bool)
            if not hit.any():
                continue
            tgt, ph = string_action(g, c[hit])
            lam[hit] *= ph
            c[hit] = tgt
        return c, lam

    def locate(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Positions of ``b`` in :attr:`reps` and a found-mask."""
        pos = np.searchsorted(self.reps, b)
        pos = np.minimum(pos, self.dim - 1)
        return pos, self.reps[pos] == b

    # operators ---------------------------------------------------------------
    def _check_op(self, p: PauliString) -> bool:
        """True if ``p`` commutes with the group; False if it anticommutes with some member."""
        return all(commutes(p, s) for s in self.stabilizers)

    def string_matrix(self, p: PauliString) -> sp.csr_matrix:
        """Sector matrix of a commuting string (signed permutation)."""
        if not self._check_op(p):
            raise SectorError(f"{p} does not commute with the stabilizers")
        tgt, ph = string_action(p, self.reps)
        b, lam = self.reduce(tgt)
        pos, ok = self.locate(b)
        if not ok.all():
            raise SectorError(f"{p} leaves the sector")
        cols = np.arange(self.dim)
        return sp.csr_matrix((ph * lam, (pos, cols)), shape=(self.dim, self.dim))

    def operator(self, op: PauliSum | PauliString, allow_anticommuting: bool = False) -> sp.csr_matrix:
        """Sparse sector matrix of ``op``.

        Strings anticommuting with a stabilizer have vanishing compression
        onto the sector; they raise unless ``allow_anticommuting``.
        """
        if isinstance(op, PauliString):
            op = PauliSum(op.n, [(1.0, op)])
        rows, cols, data = [], [], []
        idx = np.arange(self.dim)
        for c, p in op:
            if not self._check_op(p):
                if allow_anticommuting:
                    continue
                raise SectorError(f"{p} does not commute with the stabilizers")
            tgt, ph = string_action(p, self.reps)
            b, lam = self.reduce(tgt)
            pos, ok = self.locate(b)
            if not ok.all():
                raise SectorError(f"{p} leaves the sector")
            rows.append(pos)
            cols.append(idx)
            data.append(c * ph * lam)
        if not rows:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
        )

    def diagonal_values(self, p: PauliString) -> np.ndarray | None:
        """Eigenvalues of a commuting diagonal string on the basis, or None if it anticommutes."""
        if p.x != 0:
            raise ValueError("diagonal string expected")
        if not self._check_op(p):
            return None
        return (1j ** p.q) * (1 - 2 * _parity(self.reps & p.z))

    def expectation(self, op: PauliSum | PauliString, coeffs: np.ndarray) -> float:
        """``<psi|op|psi>`` for a sector state (anticommuting strings contribute zero)."""
        if isinstance(op, PauliString):
            op = PauliSum(op.n, [(1.0, op)])
        total = 0.0 + 0.0j
        w = np.abs(coeffs) ** 2
        for c, p in op:
            if p.x == 0:
                vals = self.diagonal_values(p)
                if vals is not None:
                    total += c * np.dot(w, vals)
                continue
            if not self._check_op(p):
                continue
            total += c * np.vdot(coeffs, self.string_matrix(p) @ coeffs)
        return float(total.real)

    # full-register conversion -------------------------------------------
    def project(self, full: np.ndarray) -> tuple[np.ndarray, float]:
        """Sector coordinates of ``P_sector|full>`` and the outside-sector norm."""
        full = np.asarray(full, dtype=complex)
        if full.shape != (1 << self.n,):
            raise ValueError("state width mismatch")
        nz = np.flatnonzero(full)
        b, lam = self.reduce(nz)
        pos, ok = self.locate(b)
        coeffs = np.zeros(self.dim, dtype=complex)
        # P|c> = lam * norm * |v_b>  (see reduce)
        np.add.at(coeffs, pos[ok], full[nz][ok] * lam[ok] * self.norm)
        outside = max(float(np.vdot(full, full).real - np.vdot(coeffs, coeffs).real), 0.0)
        return coeffs, float(np.sqrt(outside))

    def project_sparse(self, states: np.ndarray, amps: np.ndarray) -> np.ndarray:
        """Sector coordinates of ``P_sector sum_c amps[c] |states[c]>`` (not normalised)."""
        b, lam = self.reduce(np.asarray(states, dtype=np.int64))
        pos, ok = self.locate(b)
        coeffs = np.zeros(self.dim, dtype=complex)
        np.add.at(coeffs, pos[ok], np.asarray(amps, dtype=complex)[ok] * lam[ok] * self.norm)
        return coeffs

    def group_elements(self) -> list[PauliString]:
        elems = [PauliString.identity(self.n)]
        for g in self.generators:
            elems = elems + [multiply(g, e) for e in elems]
        return elems

    def lift(self, coeffs: np.ndarray) -> np.ndarray:
        """Full-register vector of a sector state."""
        if self.n > 26:
            raise SectorError("full register too large to materialise")
        out = np.zeros(1 << self.n, dtype=complex)
        for g in self.group_elements():
            tgt, ph = string_action(g, self.reps)
            np.add.at(out, tgt, coeffs * ph * self.norm)
        return out
