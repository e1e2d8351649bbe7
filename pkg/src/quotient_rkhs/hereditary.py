"""Truncated hereditary calculus for 1/kappa and a von Neumann inequality tester.

Both admitted kernels depend on (z, w) only through u = z1 conj(w1) and
s = z2 conj(w2), so 1/kappa is a power series in (u, s) and every term
u^i s^j is the diagonal pair alpha = beta = (i, j).  For a commuting tuple
the calculus substitutes sum a_{ab} (T^b)^* T^a.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapError, HypothesisFailed, ShapeError, SpectrumOutsideDomain
from .geometry import DomainId, SampleConfig, contains, sample, substream
from .numerics import HermitianMatrix, hermitian_eigs, psd_verdict

MAX_CAP = 24
DEFAULT_CAP = 16
MAX_SIZE = 16
COMMUTE_TOL = 1e-10
TRIANGULAR_TOL = 1e-12
VN_SLACK = 1e-6
BOUNDARY_FRACTION = 0.25
SUP_MARGIN = 0.01
HEREDITARY_DOMAINS = ("fat_hartogs:2", "egg:2")


class MatrixTuple:
    """A commuting d-tuple of upper-triangular n x n complex matrices."""

    def __init__(self, matrices):
        mats = [np.array(t, dtype=complex) for t in matrices]
        if not mats:
            raise ShapeError("MatrixTuple needs at least one matrix")
        n = mats[0].shape[0]
        for t in mats:
            if t.ndim != 2 or t.shape != (n, n):
                raise ShapeError("MatrixTuple matrices must be square of a common size")
        if n > MAX_SIZE:
            raise ShapeError(f"matrix size {n} exceeds {MAX_SIZE}")
        for t in mats:
            if np.max(np.abs(np.tril(t, -1)), initial=0.0) > TRIANGULAR_TOL:
                raise ShapeError("MatrixTuple matrices must be upper-triangular")
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                if np.max(np.abs(comm)) > COMMUTE_TOL:
                    raise ShapeError(f"matrices {i + 1} and {j + 1} do not commute")
        for t in mats:
            t.setflags(write=False)
        self.matrices = tuple(mats)

    @property
    def d(self):
        return len(self.matrices)

    @property
    def n(self):
        return self.matrices[0].shape[0]

    def power(self, alpha):
        out = np.eye(self.n, dtype=complex)
        for t, a in zip(self.matrices, alpha):
            out = out @ np.linalg.matrix_power(t, a)
        return out

    def to_json(self):
        mats = [[[[float(x.real), float(x.imag)] for x in row] for row in t] for t in self.matrices]
        return {"d": self.d, "n": self.n, "matrices": mats}

    @classmethod
    def from_json(cls, obj):
        mats = [[[complex(re, im) for re, im in row] for row in t] for t in obj["matrices"]]
        tup = cls(mats)
        if obj.get("d", tup.d) != tup.d or obj.get("n", tup.n) != tup.n:
            raise ShapeError("tuple header d/n disagrees with the matrices")
        return tup

    def __repr__(self):
        return f"MatrixTuple(d={self.d}, n={self.n})"


def load_tuple(path):
    with open(path) as fh:
        return MatrixTuple.from_json(json.load(fh))


def save_tuple(T, path):
    with open(path, "w") as fh:
        json.dump(T.to_json(), fh)


@dataclass(frozen=True)
class DiagSeries:
    """sum a_{alpha beta} z^alpha conj(w)^beta, keyed by (alpha, beta)."""

    terms: dict
    degree_cap: int
    d: int = 2

    def coefficient(self, alpha, beta):
        return self.terms.get((tuple(alpha), tuple(beta)), 0.0)

    def __call__(self, z, w):
        z, w = np.asarray(z, dtype=complex), np.conj(np.asarray(w, dtype=complex))
        return complex(sum(c * np.prod(z ** np.array(a)) * np.prod(w ** np.array(b))
                           for (a, b), c in self.terms.items()))


def _mul(p, q, cap):
    out = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            i, j = i1 + i2, j1 + j2
            if i + j <= cap:
                out[(i, j)] = out.get((i, j), 0.0) + c1 * c2
    return out


def _geometric(sign, cap):
    """sum_n (sign * u)^n truncated at degree cap."""
    return {(n, 0): float(sign) ** n for n in range(cap + 1)}


def inv_kernel_series(dom, degree_cap=DEFAULT_CAP):
    """Taylor coefficients of 1/kappa for fat_hartogs:2 or egg:2.

    fat_hartogs:2: 1/kappa = 4 (s - u^2)(1 - s) sum (-u)^n.
    egg:2:         1/kappa = 2 ((1 - u)^2 - s)^2 sum u^n.
    """
    dom = DomainId.parse(dom)
    if degree_cap > MAX_CAP:
        raise CapError(f"degree_cap {degree_cap} exceeds {MAX_CAP}")
    if degree_cap < 0:
        raise ValueError("degree_cap must be nonnegative")
    if dom.tag == "fat_hartogs" and dom.d == 2:
        poly = _mul({(0, 1): 4.0, (2, 0): -4.0}, {(0, 0): 1.0, (0, 1): -1.0}, degree_cap)
        series = _mul(poly, _geometric(-1, degree_cap), degree_cap)
    elif dom.tag == "egg" and dom.d == 2:
        inner = {(0, 0): 1.0, (1, 0): -2.0, (2, 0): 1.0, (0, 1): -1.0}
        poly = {k: 2 * v for k, v in _mul(inner, inner, degree_cap).items()}
        series = _mul(poly, _geometric(1, degree_cap), degree_cap)
    else:
        raise ValueError(f"no hereditary series for {dom}; use one of {HEREDITARY_DOMAINS}")
    terms = {((i, j), (i, j)): c for (i, j), c in series.items() if c != 0.0}
    return DiagSeries(terms, degree_cap, 2)


def hereditary_eval(s, T):
    """sum a_{alpha beta} (T^beta)^* T^alpha as a HermitianMatrix."""
    if T.d != s.d:
        raise ShapeError(f"series in {s.d} variables applied to a {T.d}-tuple")
    cache = {}

    def pw(alpha):
        if alpha not in cache:
            cache[alpha] = T.power(alpha)
        return cache[alpha]

    out = np.zeros((T.n, T.n), dtype=complex)
    for (alpha, beta), c in s.terms.items():
        out += c * pw(beta).conj().T @ pw(alpha)
    return HermitianMatrix(out)


def joint_spectrum(T):
    """Joint diagonal entries of an upper-triangular tuple (Taylor spectrum surrogate)."""
    diag = np.array([t.diagonal() for t in T.matrices])
    return [diag[:, i].copy() for i in range(T.n)]


def poly_of_tuple(f, T):
    """f(T) for a Poly f in T.d variables."""
    if f.dim != T.d:
        raise ShapeError("polynomial dimension does not match the tuple")
    out = np.zeros((T.n, T.n), dtype=complex)
    for alpha, c in f.terms.items():
        out += c * T.power(alpha)
    return out


def operator_norm(a):
    a = np.asarray(a, dtype=complex)
    return math.sqrt(max(hermitian_eigs(HermitianMatrix(a.conj().T @ a))[-1], 0.0))


def _boundary_point(dom, rng, margin):
    """A point in the outer shell of the margin-shrunk domain."""
    r = 1.0 - margin
    t = 1.0 - 0.02 * rng.uniform()
    if dom.tag == "fat_hartogs":
        a2 = r * r * t
        a1 = math.sqrt(r * r * a2) * (1.0 - 0.02 * rng.uniform())
    else:
        share = rng.uniform()
        a2 = r * r * t * share
        a1 = math.sqrt(r * r * t * (1 - share))
    th1, th2 = 2 * math.pi * rng.uniform(), 2 * math.pi * rng.uniform()
    return np.array([a1 * complex(math.cos(th1), math.sin(th1)), a2 * complex(math.cos(th2), math.sin(th2))])


def sup_norm_sample(f, dom, samples, seed, margin=SUP_MARGIN):
    """Sampled lower bound on sup |f| over dom; a quarter of the points hug the boundary."""
    dom = DomainId.parse(dom)
    n_edge = int(samples * BOUNDARY_FRACTION) if dom.tag in ("fat_hartogs", "egg") else 0
    pts = sample(dom, SampleConfig(samples - n_edge, seed, margin))
    rng = substream(seed, 1)
    pts += [_boundary_point(dom, rng, margin) for _ in range(n_edge)]
    return max(abs(f(p)) for p in pts)


@dataclass(frozen=True)
class VNResult:
    lhs: float
    rhs: float
    passed: bool
    min_eig: float

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "pass": self.passed, "hypothesis_min_eig": self.min_eig}


def check_hypothesis(T, dom, cap=DEFAULT_CAP, tol=1e-8):
    """PSD verdict and min eigenvalue of (1/kappa)(T, T^*) at the given cap."""
    ok, lo, _ = psd_verdict(hereditary_eval(inv_kernel_series(dom, cap), T), tol)
    return ok, lo


def vn_check(T, dom, f, samples=4096, seed=42, cap=DEFAULT_CAP):
    """Compare ||f(T)|| with a sampled sup of |f| over ``dom``.

    The sampled sup is a lower bound on the true sup norm, so a pass is
    only meaningful together with the 1e-6 relative slack.
    """
    dom = DomainId.parse(dom)
    for lam in joint_spectrum(T):
        if not contains(dom, lam):
            raise SpectrumOutsideDomain(f"joint eigenvalue {lam} lies outside {dom}")
    ok, lo = check_hypothesis(T, dom, cap)
    if not ok:
        raise HypothesisFailed(f"(1/kappa)(T, T*) has min eigenvalue {lo:.3e} at cap {cap}")
    lhs = operator_norm(poly_of_tuple(f, T))
    rhs = sup_norm_sample(f, dom, samples, seed)
    return VNResult(lhs, rhs, lhs <= rhs * (1 + VN_SLACK), lo)


def random_tuple(dom, rng, margin=0.1, max_size=3, offdiag=0.05):
    """A seeded admissible commuting tuple with joint spectrum in ``dom`` (shrunk by ``margin``).

    Cycles through three shapes: diagonal, a Jordan-type block
    lam*I + c*N with N nilpotent, and S D S^{-1} for a diagonal D and an
    upper unitriangular S.  Off-diagonal parts are scaled by
    ``offdiag * |lam_2|^2`` so they stay small against 1/kappa near z2 = 0.
    """
    dom = DomainId.parse(dom)
    kind = rng.next_u64() % 3
    n = 1 + int(rng.next_u64() % max_size)
    cfg = SampleConfig(n, int(rng.next_u64() >> 1), margin)
    spec = sample(dom, cfg)
    if kind == 0:
        return MatrixTuple([np.diag([p[i] for p in spec]) for i in range(2)])
    if kind == 1:
        n = max(n, 2)
        lam = spec[0]
        scale = offdiag * abs(lam[1]) ** 2
        nil = np.diag(np.ones(n - 1), 1)
        return MatrixTuple([lam[i] * np.eye(n) + scale * rng.complex_normal() * nil for i in range(2)])
    n = max(n, 2)
    spec = sample(dom, SampleConfig(n, cfg.seed, margin))
    scale = offdiag * min(abs(p[1]) ** 2 for p in spec)
    s = np.eye(n, dtype=complex) + np.triu(
        np.array([[scale * rng.complex_normal() for _ in range(n)] for _ in range(n)]), 1)
    s_inv = np.linalg.inv(s)
    mats = [np.triu(s @ np.diag([p[i] for p in spec]) @ s_inv) for i in range(2)]
    return MatrixTuple(mats)


def random_tuples(dom, count, seed=42, margin=0.1, max_size=3):
    return [random_tuple(dom, substream(seed, i), margin, max_size) for i in range(count)]


def cap_stability(T, dom, cap=DEFAULT_CAP, cap_hi=20):
    """|min eig at cap - min eig at cap_hi| for (1/kappa)(T, T^*)."""
    lo = hermitian_eigs(hereditary_eval(inv_kernel_series(dom, cap), T))[0]
    hi = hermitian_eigs(hereditary_eval(inv_kernel_series(dom, cap_hi), T))[0]
    return abs(lo - hi)


__all__ = [
    "MatrixTuple", "DiagSeries", "VNResult", "inv_kernel_series", "hereditary_eval", "joint_spectrum",
    "poly_of_tuple", "operator_norm", "sup_norm_sample", "check_hypothesis", "vn_check",
    "random_tuple", "random_tuples", "cap_stability", "load_tuple", "save_tuple",
]
