# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled statevector kernels (in-place on contiguous complex128 arrays).

A Pauli operator is passed as ``(x, z, q)`` meaning ``i**q X**x Z**z`` with
bit ``k`` of the basis index referring to qubit ``k``.
"""

from libc.math cimport cos, sin

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_clzll(unsigned long long) nogil


cdef inline double complex _iq(int q) noexcept nogil:
    q = q & 3
    if q == 0:
        return 1.0
    if q == 1:
        return 1.0j
    if q == 2:
        return -1.0
    return -1.0j


cdef inline double _sgn(unsigned long long v) noexcept nogil:
    return -1.0 if (__builtin_popcountll(v) & 1) else 1.0


def rotate_pauli(double complex[::1] psi, unsigned long long x, unsigned long long z,
                 int q, double theta):
    """psi <- exp(-i theta P) psi for Hermitian P = i^q X^x Z^z."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i, half
    cdef unsigned long long b, c, low, h
    cdef double complex w = _iq(q)
    cdef double ct = cos(theta), st = sin(theta)
    # -i sin(theta) w = mr + i mi
    cdef double mr = st * w.imag, mi = -st * w.real
    cdef double *v = <double *> &psi[0]
    cdef double ar, ai, br, bi, sb, sc
    with nogil:
        if x == 0:
            for i in range(dim):
                sb = 1.0 - 2.0 * (__builtin_popcountll(<unsigned long long>i & z) & 1)
                ar = v[2 * i]
                ai = v[2 * i + 1]
                v[2 * i] = ct * ar - sb * mi * ai + sb * mr * ar
                v[2 * i + 1] = ct * ai + sb * (mr * ai + mi * ar)
        else:
            h = 63 - __builtin_clzll(x)
            low = (1ULL << h) - 1
            half = dim >> 1
            for i in range(half):
                b = ((<unsigned long long>i & ~low) << 1) | (<unsigned long long>i & low)
                c = b ^ x
                sb = 1.0 - 2.0 * (__builtin_popcountll(b & z) & 1)
                sc = 1.0 - 2.0 * (__builtin_popcountll(c & z) & 1)
                ar = v[2 * b]
                ai = v[2 * b + 1]
                br = v[2 * c]
                bi = v[2 * c + 1]
                v[2 * b] = ct * ar + sc * (mr * br - mi * bi)
                v[2 * b + 1] = ct * ai + sc * (mr * bi + mi * br)
                v[2 * c] = ct * br + sb * (mr * ar - mi * ai)
                v[2 * c + 1] = ct * bi + sb * (mr * ai + mi * ar)


def apply_pauli(double complex[::1] psi, unsigned long long x, unsigned long long z, int q):
    """psi <- P psi."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i, half
    cdef unsigned long long b, c, low, h
    cdef double complex w = _iq(q)
    cdef double complex a0, a1
    with nogil:
        if x == 0:
            for i in range(dim):
                psi[i] = psi[i] * w * _sgn(<unsigned long long>i & z)
        else:
            h = 63 - __builtin_clzll(x)
            low = (1ULL << h) - 1
            half = dim >> 1
            for i in range(half):
                b = ((<unsigned long long>i & ~low) << 1) | (<unsigned long long>i & low)
                c = b ^ x
                a0 = psi[b]
                a1 = psi[c]
                psi[c] = w * _sgn(b & z) * a0
                psi[b] = w * _sgn(c & z) * a1


def expect_pauli(const double complex[::1] psi, unsigned long long x, unsigned long long z, int q):
    """<psi|P|psi> (complex)."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef unsigned long long b
    cdef double complex acc = 0.0
    with nogil:
        for i in range(dim):
            b = <unsigned long long>i
            acc = acc + (psi[b ^ x].real - 1j * psi[b ^ x].imag) * _sgn(b & z) * psi[b]
    return acc * _iq(q)


def apply_1q(double complex[::1] psi, int k, double complex m00, double complex m01,
             double complex m10, double complex m11):
    """Apply the 2x2 matrix [[m00, m01], [m10, m11]] to qubit k."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i, half = dim >> 1
    cdef unsigned long long b, c, low = (1ULL << k) - 1
    cdef double complex a0, a1
    with nogil:
        for i in range(half):
            b = ((<unsigned long long>i & ~low) << 1) | (<unsigned long long>i & low)
            c = b | (1ULL << k)
            a0 = psi[b]
            a1 = psi[c]
            psi[b] = m00 * a0 + m01 * a1
            psi[c] = m10 * a0 + m11 * a1


def apply_cnot(double complex[::1] psi, int control, int target):
    """CNOT with the given control and target qubits."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i, half = dim >> 1
    cdef unsigned long long b, c, low = (1ULL << target) - 1
    cdef double complex tmp
    with nogil:
        for i in range(half):
            b = ((<unsigned long long>i & ~low) << 1) | (<unsigned long long>i & low)
            if (b >> control) & 1:
                c = b | (1ULL << target)
                tmp = psi[b]
                psi[b] = psi[c]
                psi[c] = tmp
