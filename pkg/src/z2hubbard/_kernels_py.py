"""Pure numpy implementations of the statevector kernels.

Same signatures and semantics as the compiled ``_kernels`` extension; all
functions update ``psi`` in place (except :func:`expect_pauli`).
"""

from __future__ import annotations

import numpy as np

_IQ = (1.0, 1j, -1.0, -1j)


def _signs(dim: int, z: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.int64)
    return 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)


def rotate_pauli(psi: np.ndarray, x: int, z: int, q: int, theta: float) -> None:
    ppsi = psi.copy()
    apply_pauli(ppsi, x, z, q)
    psi *= np.cos(theta)
    psi += -1j * np.sin(theta) * ppsi


def apply_pauli(psi: np.ndarray, x: int, z: int, q: int) -> None:
    dim = psi.shape[0]
    psi *= _IQ[q & 3] * _signs(dim, z)
    if x:
        idx = np.arange(dim, dtype=np.int64)
        psi[:] = psi[idx ^ x]


def expect_pauli(psi: np.ndarray, x: int, z: int, q: int) -> complex:
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    return complex(_IQ[q & 3] * np.vdot(psi[idx ^ x], _signs(dim, z) * psi))


def apply_1q(psi: np.ndarray, k: int, m00, m01, m10, m11) -> None:
    v = psi.reshape(-1, 2, 1 << k)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = m00 * a0 + m01 * a1
    v[:, 1, :] = m10 * a0 + m11 * a1


def apply_cnot(psi: np.ndarray, control: int, target: int) -> None:
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    sel = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]
    other = sel | (1 << target)
    psi[sel], psi[other] = psi[other], psi[sel].copy()
