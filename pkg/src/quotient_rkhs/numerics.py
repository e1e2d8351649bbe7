"""Scalar helpers and a self-contained Hermitian eigensolver.

All PSD verdicts in the package go through :func:`hermitian_eigs`, a cyclic
Jacobi sweep on the real symmetric embedding ``[[Re, -Im], [Im, Re]]`` of a
complex Hermitian matrix.  Every eigenvalue of the embedding appears twice;
the doubled spectrum is folded back by averaging adjacent sorted pairs.
"""

import cmath
import math

import numpy as np

from .errors import DomainError, NumericalError, ShapeError

JACOBI_MAX_SWEEPS = 80


def cpow_principal(base, exponent):
    """Return ``base ** exponent`` on the principal branch, arg in (-pi, pi].

    A negative real base with a signed-zero imaginary part is treated as
    lying on the upper side of the cut, so ``(-1) ** -1.5 == 1j``.
    """
    base = complex(base)
    if base == 0:
        raise DomainError("cpow_principal: zero base")
    if base.imag == 0.0:
        base = complex(base.real, 0.0)
    return cmath.exp(exponent * cmath.log(base))


def binom_half(n):
    """Generalized binomial coefficient C(3/2, n)."""
    if n < 0:
        raise ValueError("binom_half: n must be nonnegative")
    c = 1.0
    for j in range(1, n + 1):
        c *= (1.5 - j + 1) / j
    return c


class HermitianMatrix:
    """A complex Hermitian matrix; the constructor stores ``(M + M^H) / 2``.

    Symmetrizing instead of rejecting absorbs the last-bit asymmetry of
    Gram matrices assembled from ``k(z, w)`` and ``conj(k(w, z))``.
    """

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ShapeError(f"HermitianMatrix needs a nonempty square array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericalError("HermitianMatrix: non-finite entries")
        self.entries = 0.5 * (a + a.conj().T)
        self.entries.setflags(write=False)

    @property
    def n(self):
        return self.entries.shape[0]

    def trace(self):
        return float(np.trace(self.entries).real)

    def __repr__(self):
        return f"HermitianMatrix(n={self.n})"


def _jacobi_symmetric(s, tol=1e-15, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(s, dtype=float)
    m = a.shape[0]
    if m == 1:
        return a.diagonal().copy()
    frob = float(np.sqrt(np.sum(a * a)))
    if frob == 0.0:
        return np.zeros(m)
    for _ in range(max_sweeps):
        off = float(np.sqrt(np.sum((a - np.diag(a.diagonal())) ** 2)))
        if off <= tol * frob:
            return a.diagonal().copy()
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * frob:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - sn * col_q
                a[:, q] = sn * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - sn * row_q
                a[q, :] = sn * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def hermitian_eigs(m):
    """All eigenvalues of a :class:`HermitianMatrix`, ascending."""
    if not isinstance(m, HermitianMatrix):
        m = HermitianMatrix(m)
    re, im = m.entries.real, m.entries.imag
    embedded = np.block([[re, -im], [im, re]])
    doubled = np.sort(_jacobi_symmetric(embedded))
    return [float(x) for x in 0.5 * (doubled[0::2] + doubled[1::2])]


def psd_verdict(m, tol=1e-8):
    """Return ``(is_psd, min_eig, max_eig)`` with is_psd iff min >= -tol*max(1, max)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    eigs = hermitian_eigs(m)
    lo, hi = eigs[0], eigs[-1]
    return lo >= -tol * max(1.0, hi), lo, hi
