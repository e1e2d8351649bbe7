"""Hilbert-space norms of polynomials.

Monomials are orthogonal in all three admitted base spaces, so every norm
here is a weighted coefficient sum (Parseval).  The fat-Hartogs torus
integral is evaluated exactly by matching rotation frequencies.
"""

import math
from dataclasses import dataclass

from .errors import ShapeError, UnsupportedSpace
from .geometry import get_map
from .polyalg import Poly, gamma_phi

SPACE_TAGS = ("h2_polydisc", "h2_triangle", "h2_ball")

# source Hardy space of each map family with monomial norms available
_SPACE_FOR_MAP = {"sym2": "h2_polydisc", "square_bidisc": "h2_polydisc", "hartogs": "h2_triangle", "egg": "h2_ball"}


@dataclass(frozen=True)
class SpaceId:
    tag: str
    d: int

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        tag, _, dim = str(text).strip().partition(":")
        if tag not in SPACE_TAGS:
            raise UnsupportedSpace(f"no monomial norms for space {text!r}")
        if not dim:
            raise ValueError(f"space {tag!r} needs a dimension, e.g. {tag}:2")
        if int(dim) < 2:
            raise ShapeError(f"{tag} needs d >= 2")
        return cls(tag, int(dim))

    def __str__(self):
        return f"{self.tag}:{self.d}"


@dataclass(frozen=True)
class NormReport:
    value: float
    method: str
    detail: str = ""


def space_for_map(m):
    m = get_map(m)
    if m.family not in _SPACE_FOR_MAP:
        raise UnsupportedSpace(f"no monomial-orthogonal source space registered for {m}")
    return SpaceId(_SPACE_FOR_MAP[m.family], m.d)


def monomial_norm_sq(s, alpha):
    """||z^alpha||^2 in the space ``s``.

    Polydisc and triangle monomials (nonnegative exponents) are orthonormal;
    in H^2(B^d) the norm is alpha! (d-1)! / (|alpha| + d - 1)!.
    """
    s = SpaceId.parse(s)
    alpha = tuple(alpha)
    if len(alpha) != s.d:
        raise ShapeError(f"multi-index {alpha} does not match {s}")
    if s.tag in ("h2_polydisc", "h2_triangle"):
        return 1.0
    num = math.prod(math.factorial(a) for a in alpha) * math.factorial(s.d - 1)
    return num / math.factorial(sum(alpha) + s.d - 1)


def inner(s, p, q):
    """Coefficient pairing <p, q> in the space ``s`` (linear in p)."""
    s = SpaceId.parse(s)
    if p.dim != s.d or q.dim != s.d:
        raise ShapeError(f"Poly dimension does not match {s}")
    return sum(c * q.coefficient(a).conjugate() * monomial_norm_sq(s, a)
               for a, c in p.terms.items() if a in q.terms)


def poly_norm_sq(s, p):
    s = SpaceId.parse(s)
    if p.dim != s.d:
        raise ShapeError(f"Poly dimension {p.dim} does not match {s}")
    return float(sum(abs(c) ** 2 * monomial_norm_sq(s, a) for a, c in p.terms.items()))


def phi_norm_sq(m, base, f):
    """||f||_phi^2 = ||J_phi * (f o phi)||^2 in the base space."""
    m = get_map(m)
    base = SpaceId.parse(base)
    if base != space_for_map(m):
        raise UnsupportedSpace(f"{base} is not the source space of {m}")
    return poly_norm_sq(base, gamma_phi(f, m))


def phi_norm_report(m, base, f):
    value = phi_norm_sq(m, base, f)
    return NormReport(value, "coefficient", f"||J_phi * f o phi||^2 in {SpaceId.parse(base)}")


def hartogs_torus_norm_sq(f, t1, t2):
    """Torus integral for H^2 of the 2-dimensional fat Hartogs triangle at fixed (t1, t2).

    Integrates |f(t1 t2 e^{i th1}, t2^2 e^{2 i th2})|^2 t2^5 t1 d(theta) / pi^2
    over [0, 2pi]^2.  Cross terms between monomials of different rotation
    frequency integrate to zero, so the value is
    4 t1 t2^5 sum_freq |sum of radial-weighted coefficients|^2.
    """
    if f.dim != 2:
        raise ShapeError("hartogs_torus_norm_sq is implemented for d = 2")
    if not (0.0 < t1 < 1.0 and 0.0 < t2 < 1.0):
        raise ValueError("t1, t2 must lie in (0, 1)")
    groups = {}
    for (a, b), c in f.terms.items():
        freq = (a, 2 * b)
        groups[freq] = groups.get(freq, 0) + c * (t1 * t2) ** a * t2 ** (2 * b)
    return 4.0 * t1 * t2 ** 5 * sum(abs(g) ** 2 for g in groups.values())


def hartogs_torus_sup(f, kmax=12):
    """Sup of :func:`hartogs_torus_norm_sq` over the grid t in {1 - 2^-k : k = 1..kmax}^2."""
    grid = [1.0 - 2.0 ** (-k) for k in range(1, kmax + 1)]
    return max(hartogs_torus_norm_sq(f, a, b) for a in grid for b in grid)


def bidisc_kernel_truncation(w, degree):
    """sum_{|alpha| <= degree} conj(w^alpha) z^alpha, the truncated H^2(D^2) kernel at w."""
    w1, w2 = complex(w[0]).conjugate(), complex(w[1]).conjugate()
    return Poly(2, {(a, n - a): w1 ** a * w2 ** (n - a) for n in range(degree + 1) for a in range(n + 1)})
