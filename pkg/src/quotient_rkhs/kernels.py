"""Kernel evaluators.

Base kernels live on the source domains, closed forms on the quotient
domains.  ``eval_pushforward`` is the generic quotient route: lift both
target points to the source, antisymmetrize the base kernel there and
divide by ``J_phi(z) * conj(J_phi(w))``.

All constants are exactly those of the displayed kernels, with the Cartan
volume normalization set to 1.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, ConvergenceError, NearSingularError, ShapeError, SingularError
from .geometry import DomainId, as_point, get_map, involution, jacobian, preimages
from .numerics import binom_half, cpow_principal

POLE_TOL = 1e-14
EPS_JAC = 1e-6
TETRA_DELTA = 0.05

BASE_TAGS = ("hardy_polydisc", "hardy_triangle", "szego_ball", "cartan_II_kernel", "segal_bargmann")
CLOSED_TAGS = ("g2_closed", "tetra_series", "fat_hartogs_closed", "egg_closed", "segal_pushforward_closed")
_UNPARAMETRIZED = {"cartan_II_kernel": 3, "g2_closed": 2}

_NATURAL_DOMAIN = {
    "hardy_polydisc": "polydisc",
    "hardy_triangle": "hartogs_triangle",
    "szego_ball": "ball",
    "cartan_II_kernel": "cartan_II",
    "segal_bargmann": "whole_space",
    "g2_closed": "sym_bidisc",
    "tetra_series": "tetrablock",
    "fat_hartogs_closed": "fat_hartogs",
    "egg_closed": "egg",
    "segal_pushforward_closed": "whole_space",
}


@dataclass(frozen=True)
class KernelId:
    """Kernel tag plus its parameter: dimension ``d`` or, for ``tetra_series``, the truncation ``K``."""

    tag: str
    d: int
    K: int = 0

    def __post_init__(self):
        if self.tag not in BASE_TAGS + CLOSED_TAGS:
            raise ValueError(f"unknown kernel tag {self.tag!r}")
        if self.tag == "tetra_series" and self.K < 1:
            raise ValueError("tetra_series needs truncation K >= 1")

    @classmethod
    def parse(cls, text, truncation=60):
        if isinstance(text, cls):
            return text
        tag, _, arg = str(text).strip().partition(":")
        if tag in _UNPARAMETRIZED:
            return cls(tag, _UNPARAMETRIZED[tag])
        if tag == "tetra_series":
            return cls(tag, 3, int(arg) if arg else truncation)
        if tag not in BASE_TAGS + CLOSED_TAGS:
            raise ValueError(f"unknown kernel {text!r}")
        if not arg:
            raise ValueError(f"kernel {tag!r} needs a dimension, e.g. {tag}:2")
        d = int(arg)
        if d < 2:
            raise ShapeError(f"{tag} needs d >= 2")
        return cls(tag, d)

    @property
    def domain(self):
        tag = _NATURAL_DOMAIN[self.tag]
        return DomainId.parse(tag if tag in ("cartan_II", "sym_bidisc", "tetrablock") else f"{tag}:{self.d}")

    @property
    def is_base(self):
        return self.tag in BASE_TAGS

    def __str__(self):
        if self.tag in _UNPARAMETRIZED:
            return self.tag
        if self.tag == "tetra_series":
            return f"tetra_series:{self.K}"
        return f"{self.tag}:{self.d}"


ALL_KERNELS = (
    "hardy_polydisc:2", "hardy_triangle:2", "szego_ball:2", "cartan_II_kernel", "segal_bargmann:2",
    "g2_closed", "tetra_series:60", "fat_hartogs_closed:2", "egg_closed:2", "segal_pushforward_closed:2",
)

# base kernel of each registered map's source space
BASE_FOR_MAP = {
    "sym2": "hardy_polydisc:2",
    "tetra": "cartan_II_kernel",
    "hartogs": "hardy_triangle:{d}",
    "egg": "szego_ball:{d}",
    "segal": "segal_bargmann:{d}",
    "square_bidisc": "hardy_polydisc:2",
}

# closed form of kappa_phi and the constant it carries relative to the
# quotient route; square_bidisc's closed form is the bidisc kernel itself
CLOSED_FOR_MAP = {
    "sym2": ("g2_closed", 1.0),
    "hartogs": ("fat_hartogs_closed:{d}", 1.0),
    "egg": ("egg_closed:{d}", 1.0),
    "segal": ("segal_pushforward_closed:{d}", 1.0),
    "square_bidisc": ("hardy_polydisc:2", 0.25),
}


def base_kernel_for(m):
    m = get_map(m)
    return KernelId.parse(BASE_FOR_MAP[m.family].format(d=m.d))


def closed_kernel_for(m):
    """``(KernelId, scale)`` with kappa_phi = scale * closed, or None for tetra."""
    m = get_map(m)
    if m.family not in CLOSED_FOR_MAP:
        return None
    tag, scale = CLOSED_FOR_MAP[m.family]
    return KernelId.parse(tag.format(d=m.d)), scale


def _pair(k, z, w):
    return as_point(z, k.d), as_point(w, k.d)


def _inv(x):
    if abs(x) < POLE_TOL:
        raise SingularError(f"kernel denominator {x!r} vanishes")
    return 1.0 / x


def _cartan_det(z, w):
    """det(I - Z conj(W)) for the symmetric 2x2 matrices of z and w."""
    wc = np.conj(w)
    return (1 - z[0] * wc[0] - z[1] * wc[1] - 2 * z[2] * wc[2]
            + (z[0] * z[1] - z[2] ** 2) * (wc[0] * wc[1] - wc[2] ** 2))


def eval_base(k, z, w):
    k = KernelId.parse(k)
    if not k.is_base:
        raise ValueError(f"{k} is not a base kernel")
    z, w = _pair(k, z, w)
    zw = z * np.conj(w)
    if k.tag == "hardy_polydisc":
        return complex(np.prod([_inv(1 - t) for t in zw]))
    if k.tag == "hardy_triangle":
        val = _inv(1 - zw[-1])
        for j in range(1, k.d):
            val *= _inv(zw[j] - zw[j - 1])
        return complex(val)
    if k.tag == "szego_ball":
        return complex(_inv(1 - np.sum(zw)) ** k.d)
    if k.tag == "segal_bargmann":
        return complex(cmath.exp(np.sum(zw)))
    det = complex(_cartan_det(z, w))
    _inv(det)
    # Re(det) may be negative on R_II x R_II, but det = (1-mu1)(1-mu2) with
    # |mu_i| < 1 keeps arg(det) in (-pi, pi): the principal power is the
    # holomorphic one.  Only the cut itself is refused.
    if det.imag == 0.0 and det.real <= 0.0:
        raise BranchError(f"det(I - Z conj W) = {det} lies on the branch cut")
    return cpow_principal(det, -1.5)


def eval_signed(k, m, part, z, w):
    """Half sum (``part='plus'``) or half difference (``'minus'``) of k(z, w) and k(sigma z, w)."""
    k = KernelId.parse(k)
    m = get_map(m)
    if part not in ("plus", "minus"):
        raise ValueError("part must be 'plus' or 'minus'")
    a = eval_base(k, z, w)
    b = eval_base(k, involution(m, z), w)
    return 0.5 * (a + b) if part == "plus" else 0.5 * (a - b)


def eval_pushforward(k, m, v1, v2, eps_jac=EPS_JAC, choice=(0, 0)):
    """kappa_phi(v1, v2) through preimages; independent of ``choice``."""
    m = get_map(m)
    fib1, fib2 = preimages(m, v1), preimages(m, v2)
    z, w = fib1[choice[0] % len(fib1)], fib2[choice[1] % len(fib2)]
    jz, jw = jacobian(m, z), jacobian(m, w)
    if min(abs(jz), abs(jw)) <= eps_jac:
        raise NearSingularError(f"|J_phi| = {min(abs(jz), abs(jw)):.3e} below {eps_jac}")
    return eval_signed(k, m, "minus", z, w) / (jz * jw.conjugate())


def _odd_factorial_series(x):
    """sum_n x^n / (2n+1)!, summed until terms stop changing the total."""
    total, term, n = 0j, 1.0 + 0j, 0
    while True:
        total += term
        if abs(term) <= 1e-17 * abs(total) and n > abs(x):
            return total
        term *= x / ((2 * n + 2) * (2 * n + 3))
        n += 1
        if n > 10_000:
            raise ConvergenceError("odd-factorial series did not settle")


def eval_closed(k, z, w):
    k = KernelId.parse(k)
    if k.tag == "tetra_series":
        return eval_tetra_series(z, w, k.K)[0]
    if k.is_base:
        return eval_base(k, z, w)
    z, w = _pair(k, z, w)
    wc = np.conj(w)
    if k.tag == "g2_closed":
        den = (1 - z[1] * wc[1]) ** 2 - (z[0] - z[1] * wc[0]) * (wc[0] - z[0] * wc[1])
        return complex(0.5 * _inv(den))
    zw = z * wc
    if k.tag == "fat_hartogs_closed":
        val = 0.25 * _inv(zw[-1] - zw[-2] ** 2) * (1 + zw[-2]) * _inv(1 - zw[-1])
        for j in range(1, k.d - 1):
            val *= _inv(zw[j] - zw[j - 1])
        return complex(val)
    if k.tag == "egg_closed":
        # (1/4) sum_{j odd} C(d, j) y^{d-j} x^{(j-1)/2} / (y^2 - x)^d with
        # y = 1 - <z', w'>, x = z_d conj(w_d); for d = 2 this is
        # (1/2) y / (y^2 - x)^2
        y = 1 - np.sum(zw[:-1])
        x = zw[-1]
        num = sum(math.comb(k.d, j) * y ** (k.d - j) * x ** ((j - 1) // 2) for j in range(1, k.d + 1, 2))
        return complex(0.25 * num * _inv(y * y - x) ** k.d)
    if k.tag == "segal_pushforward_closed":
        return complex(0.25 * cmath.exp(np.sum(zw[:-1])) * _odd_factorial_series(zw[-1]))
    raise ValueError(f"no closed form for {k}")


def eval_tetra_series(z, w, K, delta=TETRA_DELTA):
    """Truncated tetrablock series and a geometric bound on the omitted tail.

    With A = 1 - <sigma(z), w> and B^2 = 4 (z1 z2 - z3) conj(w1 w2 - w3) the
    k-th term is C(3/2, 2k+1) A^{1/2 - 2k} B^{2k} / (A^2 - B^2)^{3/2}.
    Requires |B| <= (1 - delta)|A| and Re(A +- B) > 0 for both roots B.
    """
    if K < 1:
        raise ValueError("truncation K must be >= 1")
    z, w = as_point(z, 3), as_point(w, 3)
    wc = np.conj(w)
    a = complex(1 - z[0] * wc[0] - z[1] * wc[1] + z[2] * wc[2])
    b2 = complex(4 * (z[0] * z[1] - z[2]) * (wc[0] * wc[1] - wc[2]))
    if a == 0 or abs(b2) > (1 - delta) ** 2 * abs(a) ** 2:
        raise ConvergenceError(f"|B/A| = {math.sqrt(abs(b2)) / max(abs(a), 1e-300):.4f} exceeds {1 - delta}")
    b = cmath.sqrt(b2)
    if a.real <= 0 or (a + b).real <= 0 or (a - b).real <= 0:
        raise BranchError("tetrablock series: Re(A +- B) must be positive")
    denom = cpow_principal(a * a - b2, -1.5)
    ratio = b2 / (a * a)
    power = cpow_principal(a, 0.5) * denom
    total = 0j
    term = 0j
    for kk in range(K + 1):
        term = binom_half(2 * kk + 1) * power
        total += term
        power *= ratio
    r = abs(ratio)
    tail = abs(term) * r / (1 - r) if r < 1 else math.inf
    return total, tail


def evaluate(k, z, w):
    """Value of any registered kernel, base or closed."""
    k = KernelId.parse(k)
    return eval_base(k, z, w) if k.is_base else eval_closed(k, z, w)
