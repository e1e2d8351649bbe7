"""Sparse multivariate polynomials and the Gamma_phi machinery on them.

A :class:`Poly` maps exponent tuples to complex coefficients.  On top of
the arithmetic this module provides, for every registered map:

* composition ``p o phi`` and the involution ``p o sigma``,
* exact division by an affine-linear polynomial (the removable
  singularity step),
* descent of sigma-invariant polynomials to the quotient (``g = f o phi``),
* ``gamma_phi(f) = J_phi * (f o phi)`` and its inverse on anti-invariant
  polynomials.
"""

import re

import numpy as np

from .errors import NotAntiInvariant, NotDivisible, NotInvariant, PolySyntaxError, ShapeError
from .geometry import SampleConfig, get_map, sample

PRUNE = 1e-15
EXACT_RTOL = 1e-12


class Poly:
    """Immutable sparse polynomial in ``dim`` variables."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=None):
        if dim < 1:
            raise ShapeError("Poly needs dim >= 1")
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or min(alpha) < 0:
                raise ShapeError(f"bad exponent {alpha} for dim {dim}")
            c = complex(c)
            if abs(c) >= PRUNE:
                clean[alpha] = c
        self.dim = dim
        self.terms = clean

    @classmethod
    def const(cls, dim, c):
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def var(cls, dim, i):
        """The coordinate function z_{i+1} (0-based ``i``)."""
        alpha = [0] * dim
        alpha[i] = 1
        return cls(dim, {tuple(alpha): 1.0})

    @classmethod
    def monomial(cls, alpha, c=1.0):
        return cls(len(alpha), {tuple(alpha): c})

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.dim != self.dim:
                raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return Poly.const(self.dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0) + c
        return Poly(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.dim, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._coerce(other)
        out = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0) + c * d
        return Poly(self.dim, out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("Poly powers must be nonnegative integers")
        result, base = Poly.const(self.dim, 1.0), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c):
        c = complex(c)
        return Poly(self.dim, {a: c * v for a, v in self.terms.items()})

    def __call__(self, z):
        z = np.asarray(z, dtype=complex).reshape(-1)
        if z.shape[0] != self.dim:
            raise ShapeError(f"evaluating a dim-{self.dim} Poly at a dim-{z.shape[0]} point")
        total = 0j
        for a, c in self.terms.items():
            total += c * np.prod(z ** np.array(a))
        return complex(total)

    eval = __call__

    # inspection

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((sum(a) for a in self.terms), default=0)

    def coefficient(self, alpha):
        return self.terms.get(tuple(alpha), 0j)

    def max_coeff(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def allclose(self, other, rtol=EXACT_RTOL):
        """Coefficient-level equality within ``rtol`` of the larger coefficient scale."""
        other = self._coerce(other)
        scale = max(1.0, self.max_coeff(), other.max_coeff())
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= rtol * scale for k in keys)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def substitute(self, components):
        """``p(components[0], ..., components[dim-1])`` for Poly components."""
        if len(components) != self.dim:
            raise ShapeError("need one component per variable")
        out_dim = components[0].dim
        cache = [{0: Poly.const(out_dim, 1.0)} for _ in components]

        def power(j, e):
            if e not in cache[j]:
                cache[j][e] = power(j, e - 1) * components[j]
            return cache[j][e]

        total = {}
        for a, c in self.terms.items():
            term = Poly.const(out_dim, c)
            for j, e in enumerate(a):
                if e:
                    term = term * power(j, e)
            for k, v in term.terms.items():
                total[k] = total.get(k, 0) + v
        return Poly(out_dim, total)

    # printing

    def sorted_terms(self):
        """Graded lexicographic order: higher degree first, then z1 before z2."""
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0])))

    def to_string(self, var="z"):
        if not self.terms:
            return "0"
        pieces = []
        for alpha, c in self.sorted_terms():
            mono = "*".join(f"{var}{j + 1}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(alpha) if e)
            if c.imag != 0.0:
                sign, body = "+", f"({_fmt(c.real)}{'-' if _neg(c.imag) else '+'}{_fmt(abs(c.imag))}i)"
                body = body + ("*" + mono if mono else "")
            else:
                sign = "-" if _neg(c.real) else "+"
                mag = abs(c.real)
                if mono:
                    body = mono if mag == 1.0 else f"{_fmt(mag)}*{mono}"
                else:
                    body = _fmt(mag)
            if not pieces:
                pieces.append(body if sign == "+" else "-" + body)
            else:
                pieces.append(f"{sign} {body}")
        return " ".join(pieces)

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"Poly({self.dim}, {self.to_string()!r})"


def _neg(x):
    return x < 0 or (x == 0 and str(x).startswith("-"))


def _fmt(x):
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


# --- parser ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<var>[zv])(?P<idx>\d+)|(?P<op>[-+*^()i]))")


def _tokenize(text):
    tokens, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("num"):
            tokens.append(("num", m.group("num"), start))
        elif m.group("var"):
            tokens.append(("var", (m.group("var"), int(m.group("idx"))), start))
        else:
            tokens.append((m.group("op"), m.group("op"), start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, dim):
        self.tokens = _tokenize(text)
        self.i = 0
        self.dim = dim
        self.letter = None

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise PolySyntaxError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        sign = 1.0
        if self.peek()[0] in ("+", "-"):
            sign = -1.0 if self.take(self.peek()[0])[0] == "-" else 1.0
        total = self.term().scale(sign)
        while self.peek()[0] in ("+", "-"):
            op = self.take(self.peek()[0])[0]
            t = self.term()
            total = total + t if op == "+" else total - t
        self.take("end")
        return total

    def signed_real(self):
        sign = 1.0
        if self.peek()[0] in ("+", "-"):
            sign = -1.0 if self.take(self.peek()[0])[0] == "-" else 1.0
        return sign * float(self.take("num")[1])

    def coeff(self):
        if self.peek()[0] == "num":
            return complex(float(self.take("num")[1]))
        self.take("(")
        re_part = self.signed_real()
        tok = self.peek()
        if tok[0] not in ("+", "-"):
            raise PolySyntaxError("expected '+' or '-' in complex coefficient", tok[2])
        sign = -1.0 if self.take(tok[0])[0] == "-" else 1.0
        im_part = float(self.take("num")[1])
        self.take("i")
        self.take(")")
        return complex(re_part, sign * im_part)

    def term(self):
        kind = self.peek()[0]
        if kind in ("num", "("):
            c = self.coeff()
            if self.peek()[0] == "*":
                self.take("*")
                return self.monomial().scale(c)
            return Poly.const(self.dim, c)
        return self.monomial()

    def factor(self):
        _, (letter, idx), pos = self.take("var")
        if self.letter is None:
            self.letter = letter
        elif letter != self.letter:
            raise PolySyntaxError(f"mixed variable names {self.letter!r} and {letter!r}", pos)
        if not 1 <= idx <= self.dim:
            raise PolySyntaxError(f"variable {letter}{idx} out of range 1..{self.dim}", pos)
        e = 1
        if self.peek()[0] == "^":
            self.take("^")
            e = int(self.take("num")[1])
        alpha = [0] * self.dim
        alpha[idx - 1] = e
        return Poly.monomial(alpha)

    def monomial(self):
        p = self.factor()
        while self.peek()[0] == "*" and self.tokens[self.i + 1][0] == "var":
            self.take("*")
            p = p * self.factor()
        return p


def parse_poly(text, dim):
    """Parse the polynomial grammar; variables ``z1..zdim`` (or ``v1..vdim``)."""
    return _Parser(text, dim).expr()


# --- map-specific polynomials ---------------------------------------------

def map_components(m):
    """phi as a list of Polys in the source variables."""
    m = get_map(m)
    d = m.d
    z = [Poly.var(d, j) for j in range(d)]
    if m.family == "sym2":
        return [z[0] + z[1], z[0] * z[1]]
    comps = list(z)
    if m.family == "tetra":
        comps[2] = z[0] * z[1] - z[2] ** 2
    else:
        comps[m.sq] = z[m.sq] ** 2
    return comps


def jacobian_poly(m):
    m = get_map(m)
    d = m.d
    if m.family == "sym2":
        return Poly.var(d, 0) - Poly.var(d, 1)
    if m.family == "tetra":
        return Poly.var(d, 2).scale(-2.0)
    return Poly.var(d, m.sq).scale(2.0)


def apply_sigma(p, m):
    """``p o sigma`` for the signed permutation sigma of ``m``."""
    m = get_map(m)
    if p.dim != m.d:
        raise ShapeError(f"Poly has dim {p.dim}, map {m} has dim {m.d}")
    out = {}
    for a, c in p.terms.items():
        beta = [0] * p.dim
        sgn = 1
        for i, e in enumerate(a):
            beta[m.perm[i]] += e
            if m.signs[i] < 0 and e % 2:
                sgn = -sgn
        beta = tuple(beta)
        out[beta] = out.get(beta, 0) + sgn * c
    return Poly(p.dim, out)


def compose_with_map(p, m):
    m = get_map(m)
    if p.dim != m.d:
        raise ShapeError(f"Poly has dim {p.dim}, map {m} has dim {m.d}")
    return p.substitute(map_components(m))


def symmetrize(p, m, sign):
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    ps = apply_sigma(p, m)
    return (p + ps).scale(0.5) if sign == "plus" else (p - ps).scale(0.5)


def divide_by_affine(p, linear, rtol=EXACT_RTOL):
    """Exact quotient ``p / linear`` for a degree-1 ``linear``.

    Long division in the variable with the largest linear coefficient;
    coefficients in the other variables are carried along as polynomials.
    """
    if p.dim != linear.dim:
        raise ShapeError("dimension mismatch")
    lin = {a: c for a, c in linear.terms.items() if sum(a) == 1}
    if linear.degree() != 1 or not lin:
        raise ValueError("divisor must have total degree 1")
    lead_alpha, lead_c = max(lin.items(), key=lambda t: abs(t[1]))
    k = lead_alpha.index(1)
    rest = linear - Poly.monomial(lead_alpha, lead_c)
    remainder = p
    quotient = {}
    scale = max(1.0, p.max_coeff())
    while True:
        top = max((a[k] for a in remainder.terms), default=0)
        if top == 0:
            break
        lead_terms = {a: c for a, c in remainder.terms.items() if a[k] == top}
        q_part = {}
        for a, c in lead_terms.items():
            b = list(a)
            b[k] -= 1
            q_part[tuple(b)] = c / lead_c
        q_poly = Poly(p.dim, q_part)
        for a, c in q_poly.terms.items():
            quotient[a] = quotient.get(a, 0) + c
        lower = Poly(p.dim, {a: c for a, c in remainder.terms.items() if a[k] != top})
        remainder = lower - q_poly * rest
    if remainder.max_coeff() > rtol * scale:
        raise NotDivisible(f"remainder {remainder.to_string()} after dividing by {linear.to_string()}")
    return Poly(p.dim, quotient)


def _check_invariant(g, m, rtol):
    if not apply_sigma(g, m).allclose(g, rtol):
        raise NotInvariant(f"{g.to_string()} is not sigma-invariant for {m}")


def _descend_sym2(g, rtol):
    # substitute z2 = e1 - z1 in the ring C[z1, e1, e2], then reduce with
    # z1^2 = e1 z1 - e2 until z1 appears at most linearly
    x0, x1 = Poly.var(3, 0), Poly.var(3, 1)
    lifted = g.substitute([x0, x1 - x0])
    terms = dict(lifted.terms)
    while True:
        top = max((a[0] for a in terms), default=0)
        if top < 2:
            break
        for a in [a for a in terms if a[0] == top]:
            c = terms.pop(a)
            n, i, j = a
            for key, val in (((n - 1, i + 1, j), c), ((n - 2, i, j + 1), -c)):
                terms[key] = terms.get(key, 0) + val
    linear_part = max((abs(c) for a, c in terms.items() if a[0] == 1), default=0.0)
    if linear_part > rtol * max(1.0, g.max_coeff()):
        raise NotInvariant("sym2 descent left a term linear in z1")
    return Poly(2, {(i, j): c for (n, i, j), c in terms.items() if n == 0})


def descend(g, m, rtol=EXACT_RTOL):
    """The f on the quotient with ``f o phi == g`` for sigma-invariant g."""
    m = get_map(m)
    if g.dim != m.d:
        raise ShapeError(f"Poly has dim {g.dim}, map {m} has dim {m.d}")
    _check_invariant(g, m, rtol)
    if m.family == "sym2":
        return _descend_sym2(g, rtol)
    k = 2 if m.family == "tetra" else m.sq
    even = {a: c for a, c in g.terms.items() if a[k] % 2 == 0}
    if m.family != "tetra":
        return Poly(m.d, {a[:k] + (a[k] // 2,) + a[k + 1:]: c for a, c in even.items()})
    # z3^(2c) = (z1 z2 - v3)^c = (v1 v2 - v3)^c
    v = [Poly.var(3, j) for j in range(3)]
    base = v[0] * v[1] - v[2]
    out = Poly(3)
    for (a, b, c2), c in even.items():
        out = out + (base ** (c2 // 2)) * Poly.monomial((a, b, 0), c)
    return out


def gamma_phi(f, m):
    """``J_phi * (f o phi)``."""
    return jacobian_poly(m) * compose_with_map(f, m)


def gamma_phi_inverse(g, m, rtol=EXACT_RTOL):
    """The f with ``gamma_phi(f, m) == g`` for sigma-anti-invariant g."""
    m = get_map(m)
    if g.dim != m.d:
        raise ShapeError(f"Poly has dim {g.dim}, map {m} has dim {m.d}")
    if not apply_sigma(g, m).allclose(-g, rtol):
        raise NotAntiInvariant(f"{g.to_string()} is not sigma-anti-invariant for {m}")
    h = divide_by_affine(g, jacobian_poly(m), rtol)
    return descend(h, m, rtol=max(rtol, 1e-10))


def check_intertwining(m, f, i, samples=100, seed=42, margin=0.05):
    """Max scaled residual of Gamma(v_i f) - phi_i Gamma(f) over seeded source points.

    ``i`` is 1-based.  The residual at each point is divided by
    ``max(1, |Gamma(v_i f)(z)|)`` so unbounded sources are measured in
    relative roundoff.
    """
    m = get_map(m)
    if not 1 <= i <= m.d:
        raise ValueError(f"coordinate index {i} out of range 1..{m.d}")
    lhs_poly = gamma_phi(Poly.var(m.d, i - 1) * f, m)
    gf = gamma_phi(f, m)
    phi_i = map_components(m)[i - 1]
    worst = 0.0
    for z in sample(m.source, SampleConfig(samples, seed, margin)):
        lhs = lhs_poly(z)
        rhs = phi_i(z) * gf(z)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst


def random_poly(dim, degree, rng, density=0.6):
    """A random complex polynomial of total degree <= ``degree``.

    ``rng`` is a :class:`~quotient_rkhs.geometry.SplitMix64`.
    """
    terms = {}
    for alpha in _multi_indices(dim, degree):
        if rng.uniform() < density:
            terms[alpha] = rng.complex_normal()
    if not terms:
        terms[(0,) * dim] = 1.0
    return Poly(dim, terms)


def _multi_indices(dim, degree):
    if dim == 1:
        return [(k,) for k in range(degree + 1)]
    return [(k,) + rest for k in range(degree + 1) for rest in _multi_indices(dim - 1, degree - k)]
