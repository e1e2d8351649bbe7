import cmath
import itertools
import math

import numpy as np
import pytest

from quotient_rkhs.errors import BranchError, ConvergenceError, NearSingularError, SingularError
from quotient_rkhs.geometry import REGISTERED_MAPS, SampleConfig, apply_map, get_map, sample
from quotient_rkhs.kernels import (ALL_KERNELS, KernelId, base_kernel_for, closed_kernel_for, eval_base,
                                   eval_closed, eval_pushforward, eval_signed, eval_tetra_series, evaluate)
from quotient_rkhs.numerics import binom_half


def test_base_examples():
    assert eval_base("hardy_polydisc:2", [0, 0], [0, 0]) == 1
    assert eval_base("hardy_polydisc:2", [0.5, 0.5], [0.5, 0.5]) == pytest.approx(16 / 9)
    r = 1 / math.sqrt(2)
    assert eval_base("hardy_triangle:2", [0, r], [0, r]) == pytest.approx(4)
    assert eval_base("segal_bargmann:2", [0, 0], [0, 0]) == 1


def test_cartan_kernel_matches_matrix_determinant():
    z = np.array([0.3 + 0.1j, -0.2j, 0.25])
    w = np.array([0.1, 0.4 - 0.1j, -0.2 + 0.1j])
    Z = np.array([[z[0], z[2]], [z[2], z[1]]])
    W = np.array([[w[0], w[2]], [w[2], w[1]]])
    det = np.linalg.det(np.eye(2) - Z @ W.conj())
    assert eval_base("cartan_II_kernel", z, w) == pytest.approx(det ** -1.5, rel=1e-13)


def test_cartan_kernel_branch_cut():
    # det(I - Z conj W) = 1 - 4 * 0.5 * 0.5 ... = real nonpositive lies on the cut
    with pytest.raises((BranchError, SingularError)):
        eval_base("cartan_II_kernel", [1.0, 1.0, 0.0], [1.0, 1.0, 0.0])


def test_pole_raises():
    with pytest.raises(SingularError):
        eval_base("hardy_polydisc:2", [1.0, 0.0], [1.0, 0.0])


def test_signed_examples():
    z = w = np.array([0.2, 0.3])
    expected = 0.5 * (1 / 0.8736 - 1 / 0.8836)
    assert eval_signed("hardy_polydisc:2", "sym2", "minus", z, w) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.0064774, abs=1e-7)
    fixed = np.array([0.25, 0.25])
    assert eval_signed("hardy_polydisc:2", "sym2", "minus", fixed, w) == 0
    plus = eval_signed("hardy_polydisc:2", "sym2", "plus", z, w)
    minus = eval_signed("hardy_polydisc:2", "sym2", "minus", z, w)
    assert plus + minus == pytest.approx(eval_base("hardy_polydisc:2", z, w))


def test_pushforward_examples():
    v = [0.5, 0.06]
    assert eval_pushforward("hardy_polydisc:2", "sym2", v, v) == pytest.approx(0.64774, abs=1e-5)
    v = [0.3, 0.16]
    hand = 0.5 * (0.75 ** -2 - 1.07 ** -2) / 0.64
    assert eval_pushforward("szego_ball:2", "egg:2", v, v) == pytest.approx(hand, rel=1e-12)
    assert hand == pytest.approx(0.706515, abs=1e-6)


def test_pushforward_near_singular():
    with pytest.raises(NearSingularError):
        eval_pushforward("hardy_polydisc:2", "sym2", [0.6, 0.09], [0.5, 0.06])


def test_square_bidisc_quarter():
    pts = sample("polydisc:2", SampleConfig(400, seed=21))
    for v, w in zip(pts[::2], pts[1::2]):
        if min(abs(v[0]), abs(w[0])) < 1e-3:
            continue
        lhs = eval_pushforward("hardy_polydisc:2", "square_bidisc", v, w)
        assert lhs == pytest.approx(0.25 * eval_base("hardy_polydisc:2", v, w), rel=1e-12)


@pytest.mark.parametrize("name", REGISTERED_MAPS)
def test_preimage_independence(name):
    m = get_map(name)
    k = base_kernel_for(m)
    pts = sample(m.target, SampleConfig(20, seed=4))
    for v, w in zip(pts[::2], pts[1::2]):
        vals = [eval_pushforward(k, m, v, w, choice=c) for c in itertools.product((0, 1), repeat=2)]
        for x in vals[1:]:
            assert x == pytest.approx(vals[0], rel=1e-11)


def test_closed_examples():
    assert eval_closed("g2_closed", [0, 0], [0, 0]) == pytest.approx(0.5)
    assert eval_closed("fat_hartogs_closed:2", [0, 0.5], [0, 0.5]) == pytest.approx(4 / 3)
    assert eval_closed("egg_closed:2", [0, 0], [0, 0]) == pytest.approx(0.5)
    assert eval_closed("segal_pushforward_closed:2", [0, 1], [0, 1]) == pytest.approx(math.sinh(1) / 4, rel=1e-14)


@pytest.mark.parametrize("x", [0.3, 2.0, -1.5 + 0.5j, 25.0, 9j])
def test_segal_closed_against_sinh(x):
    # sum x^n / (2n+1)! = sinh(sqrt x) / sqrt x
    root = cmath.sqrt(x)
    z = np.array([0.2 - 0.1j, x])
    w = np.array([0.4, 1.0])
    expected = 0.25 * cmath.exp(z[0] * np.conj(w[0])) * cmath.sinh(root) / root
    assert eval_closed("segal_pushforward_closed:2", z, w) == pytest.approx(expected, rel=1e-13)


def test_egg_closed_general_dimension_matches_quotient():
    # the d >= 3 closed form is checked against the quotient route directly
    for d in (3, 4):
        m = get_map(f"egg:{d}")
        pts = sample(m.target, SampleConfig(20, seed=d))
        for v, w in zip(pts[::2], pts[1::2]):
            q = eval_pushforward(f"szego_ball:{d}", m, v, w)
            assert eval_closed(f"egg_closed:{d}", v, w) == pytest.approx(q, rel=1e-11)


def test_tetra_series_examples():
    val, tail = eval_tetra_series([0, 0, 0], [0, 0, 0], 1)
    assert val == pytest.approx(1.5) and tail == 0


def test_tetra_series_terms_by_hand():
    z = np.array([0.3, 0.2, 0.0])
    w = np.array([0.25, 0.1j, 0.05])
    a = 1 - z[0] * np.conj(w[0]) - z[1] * np.conj(w[1]) + z[2] * np.conj(w[2])
    b2 = 4 * (z[0] * z[1] - z[2]) * np.conj(w[0] * w[1] - w[2])
    expected = sum(binom_half(2 * k + 1) * a ** (0.5 - 2 * k) * b2 ** k for k in range(4)) / (a * a - b2) ** 1.5
    assert eval_tetra_series(z, w, 3)[0] == pytest.approx(expected, rel=1e-13)


def test_tetra_series_tail_contract_and_route():
    m = get_map("tetra")
    pts = [apply_map(m, p) for p in sample("omega_tetra", SampleConfig(60, seed=8))]
    checked = 0
    for v, w in zip(pts[::2], pts[1::2]):
        try:
            s40, t40 = eval_tetra_series(v, w, 40)
        except (ConvergenceError, BranchError):
            continue
        s50, _ = eval_tetra_series(v, w, 50)
        assert abs(s40 - s50) <= t40 * (1 + 1e-9) + 1e-15 * abs(s50)
        assert eval_tetra_series(v, w, 60)[0] == pytest.approx(2 * eval_pushforward("cartan_II_kernel", m, v, w),
                                                               rel=1e-8)
        checked += 1
    assert checked >= 25


def test_tetra_series_guard():
    with pytest.raises(ConvergenceError):
        eval_tetra_series([0.9, 0.9, 0.0], [0.9, 0.9, 0.0], 10)


@pytest.mark.parametrize("text", ALL_KERNELS)
def test_hermitian_symmetry(text):
    k = KernelId.parse(text)
    dom = k.domain
    if k.tag == "tetra_series":
        pts = [apply_map("tetra", p) for p in sample("omega_tetra", SampleConfig(400, seed=2, margin=0.1))]
    else:
        pts = sample(dom, SampleConfig(400, seed=2, margin=0.1))
    for z, w in zip(pts[::2], pts[1::2]):
        try:
            a = evaluate(k, z, w)
        except (ConvergenceError, BranchError):
            continue
        assert a == pytest.approx(np.conj(evaluate(k, w, z)), rel=1e-12)


def test_kernel_ids():
    assert KernelId.parse("tetra_series:60").K == 60
    assert str(KernelId.parse("tetra_series", truncation=7)) == "tetra_series:7"
    assert KernelId.parse("cartan_II_kernel").d == 3
    assert closed_kernel_for("tetra") is None
    assert closed_kernel_for("square_bidisc") == (KernelId.parse("hardy_polydisc:2"), 0.25)
    with pytest.raises(ValueError):
        KernelId.parse("tetra_series:0")
