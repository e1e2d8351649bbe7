"""Domains, the registered sigma-invariant 2-proper maps, and seeded samplers.

Points are 1-D ``complex`` numpy arrays.  Domains and maps are addressed by
the same string identifiers the CLI uses, e.g. ``"polydisc:2"``,
``"cartan_II"``, ``"hartogs:3"``, ``"square_bidisc"``.

Every registered involution is a signed coordinate permutation
``sigma(z)_i = sign_i * z[perm_i]``, and every registered map has a single
quadratic coordinate; that structure is what makes the preimage solvers and
the polynomial routines in :mod:`quotient_rkhs.polyalg` closed-form.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SamplerExhausted, ShapeError

MASK64 = (1 << 64) - 1
MAX_ATTEMPTS = 10**6
DEFAULT_MARGIN = 0.05
# |discriminant| (or |squared coordinate|) below which a fiber collapses to
# the single point on Fix(sigma)
FIBER_TOL = 1e-14

PARAMETRIZED = ("polydisc", "hartogs_triangle", "ball", "whole_space", "fat_hartogs", "egg")
FIXED_DIMS = {"cartan_II": 3, "sym_bidisc": 2, "tetrablock": 3, "omega_tetra": 3}


def as_point(z, dim=None):
    p = np.asarray(z, dtype=complex).reshape(-1)
    if dim is not None and p.shape[0] != dim:
        raise ShapeError(f"expected a point of dimension {dim}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise DomainError("point has non-finite coordinates")
    return p


@dataclass(frozen=True)
class DomainId:
    tag: str
    d: int

    def __post_init__(self):
        if self.tag in FIXED_DIMS:
            if self.d != FIXED_DIMS[self.tag]:
                raise ShapeError(f"{self.tag} has fixed dimension {FIXED_DIMS[self.tag]}")
        elif self.tag in PARAMETRIZED:
            if self.d < 2:
                raise ShapeError(f"{self.tag} needs d >= 2")
        else:
            raise ValueError(f"unknown domain tag {self.tag!r}")

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        tag, _, dim = str(text).strip().partition(":")
        if tag in FIXED_DIMS:
            if dim and int(dim) != FIXED_DIMS[tag]:
                raise ShapeError(f"{tag} has fixed dimension {FIXED_DIMS[tag]}")
            return cls(tag, FIXED_DIMS[tag])
        if tag not in PARAMETRIZED:
            raise ValueError(f"unknown domain {text!r}")
        if not dim:
            raise ValueError(f"domain {tag!r} needs a dimension, e.g. {tag}:2")
        return cls(tag, int(dim))

    def __str__(self):
        return self.tag if self.tag in FIXED_DIMS else f"{self.tag}:{self.d}"


@dataclass(frozen=True)
class SampleConfig:
    count: int
    seed: int = 42
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        if not 0.0 <= self.margin < 1.0:
            raise ValueError("margin must lie in [0, 1)")


@dataclass(frozen=True)
class ProperMap:
    """A registered (phi, sigma, J_phi, preimage solver) bundle.

    ``family`` is one of ``sym2``, ``tetra``, ``hartogs``, ``egg``, ``segal``,
    ``square_bidisc``; ``sq`` is the index of the coordinate that phi squares
    (unused for ``sym2``).
    """

    family: str
    d: int
    source: DomainId
    target: DomainId
    perm: tuple
    signs: tuple
    sq: int = field(default=-1)

    @property
    def id(self):
        if self.family in ("hartogs", "egg", "segal"):
            return f"{self.family}:{self.d}"
        return self.family

    def __str__(self):
        return self.id


def get_map(text):
    """Look up a registered map by CLI identifier."""
    if isinstance(text, ProperMap):
        return text
    family, _, dim = str(text).strip().partition(":")
    if family == "sym2":
        return ProperMap("sym2", 2, DomainId("polydisc", 2), DomainId("sym_bidisc", 2), (1, 0), (1, 1))
    if family == "tetra":
        return ProperMap("tetra", 3, DomainId("cartan_II", 3), DomainId("tetrablock", 3),
                         (0, 1, 2), (1, 1, -1), sq=2)
    if family == "square_bidisc":
        return ProperMap("square_bidisc", 2, DomainId("polydisc", 2), DomainId("polydisc", 2),
                         (0, 1), (-1, 1), sq=0)
    pairs = {"hartogs": ("hartogs_triangle", "fat_hartogs"),
             "egg": ("ball", "egg"),
             "segal": ("whole_space", "whole_space")}
    if family in pairs:
        if not dim:
            raise ValueError(f"map {family!r} needs a dimension, e.g. {family}:2")
        d = int(dim)
        src, tgt = pairs[family]
        return ProperMap(family, d, DomainId(src, d), DomainId(tgt, d),
                         tuple(range(d)), (1,) * (d - 1) + (-1,), sq=d - 1)
    raise ValueError(f"unknown map {text!r}")


REGISTERED_MAPS = ("sym2", "tetra", "hartogs:2", "hartogs:3", "egg:2", "segal:2", "square_bidisc")


# --- membership -----------------------------------------------------------

def _cartan_norm(z1, z2, z3):
    """Largest singular value of [[z1, z3], [z3, z2]] from the 2x2 W^*W invariants."""
    tr = abs(z1) ** 2 + abs(z2) ** 2 + 2 * abs(z3) ** 2
    det = abs(z1 * z2 - z3 * z3) ** 2
    disc = max(tr * tr - 4 * det, 0.0)
    return math.sqrt(0.5 * (tr + math.sqrt(disc)))


def _omega_slack(z):
    z1, z2, z3 = z
    return 1 - abs(z1) ** 2 - abs(z2) ** 2 + abs(z1 * z2 - z3 * z3) ** 2, 2 * abs(z3) ** 2


def _sym_roots(v1, v2):
    disc = cmath.sqrt(v1 * v1 - 4 * v2)
    return 0.5 * (v1 + disc), 0.5 * (v1 - disc)


def contains(dom, z, margin=0.0):
    """Open-domain membership; ``margin > 0`` tests the shrunken domain.

    The shrunken domain scales every defining strict inequality by
    ``1 - margin`` (radially for balls and polydiscs, ratio-wise for the
    Hartogs-type chains, and via the source domain for quotient domains).
    """
    dom = DomainId.parse(dom)
    z = as_point(z, dom.d)
    r = 1.0 - margin
    a = np.abs(z)
    tag = dom.tag
    if tag == "polydisc":
        return bool(np.all(a < r))
    if tag == "ball":
        return float(np.sum(a * a)) < r * r
    if tag == "whole_space":
        return True
    if tag == "hartogs_triangle":
        return bool(np.all(a[:-1] < r * a[1:])) and a[-1] < r
    if tag == "fat_hartogs":
        chain = bool(np.all(a[:-2] < r * a[1:-1]))
        return chain and a[-2] ** 2 < r * r * a[-1] and a[-1] < r * r
    if tag == "egg":
        return float(np.sum(a[:-1] ** 2)) + a[-1] < r * r
    if tag == "cartan_II":
        return _cartan_norm(*z) < r
    if tag == "omega_tetra":
        slack, b = _omega_slack(z)
        return b < r * slack
    if tag == "sym_bidisc":
        t1, t2 = _sym_roots(z[0], z[1])
        return abs(t1) < r and abs(t2) < r
    if tag == "tetrablock":
        t = cmath.sqrt(z[0] * z[1] - z[2])
        return _cartan_norm(z[0], z[1], t) < r
    raise ValueError(f"unknown domain {dom}")


# --- deterministic RNG ----------------------------------------------------

class SplitMix64:
    """SplitMix64 (Steele, Lea & Flood 2014): state += golden gamma, then mix.

    ``uniform`` takes the top 53 bits; ``normal`` is Box-Muller on two
    uniforms.  Sample sequences are reproducible across platforms up to the
    libm used for log/cos/sin.
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed):
        self.state = int(seed) & MASK64

    @staticmethod
    def mix(z):
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_u64(self):
        self.state = (self.state + self.GAMMA) & MASK64
        return self.mix(self.state)

    def uniform(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self):
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def unit_disc(self, radius=1.0):
        """A uniform point of the disc |w| < radius."""
        rho = radius * math.sqrt(self.uniform())
        return cmath.rect(rho, 2.0 * math.pi * self.uniform())

    def complex_normal(self):
        """Standard complex Gaussian, E|w|^2 = 1."""
        return complex(self.normal(), self.normal()) / math.sqrt(2.0)


def substream(seed, index):
    """Independent generator for task ``index`` under a campaign seed."""
    return SplitMix64(SplitMix64.mix((int(seed) + SplitMix64.GAMMA * (index + 1)) & MASK64))


# --- sampling -------------------------------------------------------------

_PUSHFORWARD = {"sym_bidisc": "sym2", "tetrablock": "tetra", "fat_hartogs": "hartogs", "egg": "egg"}


def _source_map(dom):
    family = _PUSHFORWARD[dom.tag]
    return get_map(f"{family}:{dom.d}" if family in ("hartogs", "egg") else family)


def _rejection(dom, rng, count, margin, bound=1.0):
    out, attempts = [], 0
    while len(out) < count:
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise SamplerExhausted(f"{dom}: rejection sampler exceeded {MAX_ATTEMPTS} attempts")
        z = np.array([rng.unit_disc(bound) for _ in range(dom.d)])
        if contains(dom, z, margin):
            out.append(z)
    return out


def sample(dom, cfg, rng=None):
    """Deterministic in-domain samples for ``(dom, cfg)``.

    Polydisc, ball, triangle and Cartan samples come from rejection inside
    the unit polydisc; ``omega_tetra`` samples are Cartan samples that also
    satisfy the Omega inequality; ``whole_space`` draws a standard complex
    Gaussian cloud; quotient domains push source samples through phi.
    """
    dom = DomainId.parse(dom)
    rng = rng or SplitMix64(cfg.seed)
    if dom.tag in _PUSHFORWARD:
        m = _source_map(dom)
        return [apply_map(m, z) for z in sample(m.source, cfg, rng)]
    if dom.tag == "whole_space":
        return [np.array([rng.complex_normal() for _ in range(dom.d)]) for _ in range(cfg.count)]
    if dom.tag == "polydisc":
        r = 1.0 - cfg.margin
        return [np.array([rng.unit_disc(r) for _ in range(dom.d)]) for _ in range(cfg.count)]
    if dom.tag == "omega_tetra":
        cartan = DomainId("cartan_II", 3)
        out, attempts = [], 0
        while len(out) < cfg.count:
            attempts += 1
            if attempts > MAX_ATTEMPTS:
                raise SamplerExhausted("omega_tetra: rejection sampler exhausted")
            (z,) = _rejection(cartan, rng, 1, cfg.margin)
            if contains(dom, z, cfg.margin):
                out.append(z)
        return out
    return _rejection(dom, rng, cfg.count, cfg.margin)


# --- the registered maps --------------------------------------------------

def _check(m, z):
    return as_point(z, m.d)


def apply_map(m, z):
    m = get_map(m)
    z = _check(m, z)
    if m.family == "sym2":
        return np.array([z[0] + z[1], z[0] * z[1]])
    out = z.copy()
    if m.family == "tetra":
        out[2] = z[0] * z[1] - z[2] * z[2]
    else:
        out[m.sq] = z[m.sq] * z[m.sq]
    return out


def jacobian(m, z):
    """Closed-form J_phi(z)."""
    m = get_map(m)
    z = _check(m, z)
    if m.family == "sym2":
        return complex(z[0] - z[1])
    if m.family == "tetra":
        return complex(-2.0 * z[2])
    return complex(2.0 * z[m.sq])


def involution(m, z):
    m = get_map(m)
    z = _check(m, z)
    return np.array([s * z[p] for p, s in zip(m.perm, m.signs)])


def preimages(m, v):
    """The full fiber phi^{-1}(v) inside the source domain.

    Two sigma-related points generically, a single point of Fix(sigma) when
    the discriminant (sym2) or the squared coordinate vanishes.
    """
    m = get_map(m)
    v = _check(m, v)
    if not contains(m.target, v):
        raise DomainError(f"{v} is not in {m.target}")
    if m.family == "sym2":
        disc = v[0] * v[0] - 4 * v[1]
        if abs(disc) <= FIBER_TOL * max(1.0, abs(v[0]) ** 2):
            t = 0.5 * v[0]
            return [np.array([t, t])]
        t1, t2 = _sym_roots(v[0], v[1])
        return [np.array([t1, t2]), np.array([t2, t1])]
    if m.family == "tetra":
        q, k = v[0] * v[1] - v[2], 2
    else:
        q, k = v[m.sq], m.sq
    if abs(q) <= FIBER_TOL * max(1.0, float(np.max(np.abs(v))) ** 2):
        p = v.copy()
        p[k] = 0.0
        return [p]
    root = cmath.sqrt(q)
    plus, minus = v.copy(), v.copy()
    plus[k], minus[k] = root, -root
    return [plus, minus]
