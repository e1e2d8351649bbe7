import json

import numpy as np
import pytest

from quotient_rkhs.errors import CapError, HypothesisFailed, ShapeError, SpectrumOutsideDomain
from quotient_rkhs.geometry import SampleConfig, sample, substream
from quotient_rkhs.hereditary import (MatrixTuple, cap_stability, check_hypothesis, hereditary_eval,
                                      inv_kernel_series, joint_spectrum, load_tuple, operator_norm, poly_of_tuple,
                                      random_tuples, save_tuple, vn_check)
from quotient_rkhs.kernels import eval_closed
from quotient_rkhs.numerics import psd_verdict
from quotient_rkhs.polyalg import Poly, parse_poly, random_poly

PAIR = MatrixTuple([[[0.3, 0.1], [0, 0.3]], [[0.5, 0.1], [0, 0.5]]])


def test_series_examples():
    s = inv_kernel_series("fat_hartogs:2", 2)
    assert s.terms == {((0, 1), (0, 1)): 4, ((1, 1), (1, 1)): -4, ((2, 0), (2, 0)): -4, ((0, 2), (0, 2)): -4}
    assert s.coefficient((0, 0), (0, 0)) == 0
    assert inv_kernel_series("egg:2", 0).terms == {((0, 0), (0, 0)): 2}
    with pytest.raises(CapError):
        inv_kernel_series("egg:2", 25)
    with pytest.raises(ValueError):
        inv_kernel_series("ball:2", 4)


@pytest.mark.parametrize("dom,closed", [("fat_hartogs:2", "fat_hartogs_closed:2"), ("egg:2", "egg_closed:2")])
def test_series_is_reciprocal_kernel(dom, closed):
    s = inv_kernel_series(dom, 24)
    z, w = np.array([0.2 + 0.1j, 0.5]), np.array([0.1, 0.4 - 0.2j])
    assert s(z, w) == pytest.approx(1 / eval_closed(closed, z, w), rel=1e-9)
    assert all(a == b for a, b in s.terms)


def test_eval_examples():
    zero = MatrixTuple([np.zeros((3, 3)), np.zeros((3, 3))])
    for dom in ("fat_hartogs:2", "egg:2"):
        s = inv_kernel_series(dom)
        assert np.allclose(hereditary_eval(s, zero).entries, s.coefficient((0, 0), (0, 0)) * np.eye(3))
    ok, _, _ = psd_verdict(hereditary_eval(inv_kernel_series("fat_hartogs:2", 12), PAIR))
    assert ok


@pytest.mark.parametrize("dom,closed", [("fat_hartogs:2", "fat_hartogs_closed:2"), ("egg:2", "egg_closed:2")])
def test_diagonal_oracle(dom, closed):
    # modest spectra: the omitted Taylor tail at cap 20 is below 1e-8 there
    lams = [p for p in sample(dom, SampleConfig(40, seed=17, margin=0.1)) if np.abs(p).max() <= 0.5][:4]
    assert len(lams) == 4
    T = MatrixTuple([np.diag([p[i] for p in lams]) for i in range(2)])
    h = hereditary_eval(inv_kernel_series(dom, 20), T).entries
    assert np.allclose(h, np.diag(np.diag(h)), atol=1e-14)
    for i, lam in enumerate(lams):
        assert h[i, i] == pytest.approx(1 / eval_closed(closed, lam, lam), abs=1e-8)


def test_joint_spectrum_examples():
    T = MatrixTuple([np.diag([0.1, 0.2]), np.diag([0.5, 0.6])])
    assert [list(p) for p in joint_spectrum(T)] == [[0.1, 0.5], [0.2, 0.6]]
    assert [list(p) for p in joint_spectrum(PAIR)] == [[0.3, 0.5], [0.3, 0.5]]
    assert [list(p) for p in joint_spectrum(MatrixTuple([[[0.2]], [[0.7]]]))] == [[0.2, 0.7]]


def test_tuple_validation():
    with pytest.raises(ShapeError):
        MatrixTuple([[[0, 0], [1, 0]], np.eye(2)])
    with pytest.raises(ShapeError):
        MatrixTuple([[[1, 1], [0, 2]], [[1, 0], [0, 3]]])
    with pytest.raises(ShapeError):
        MatrixTuple([np.eye(17), np.eye(17)])


def test_tuple_json_round_trip(tmp_path):
    T = random_tuples("egg:2", 3, seed=5)[2]
    path = tmp_path / "t.json"
    save_tuple(T, path)
    obj = json.loads(path.read_text())
    assert set(obj) == {"d", "n", "matrices"} and obj["n"] == T.n
    back = load_tuple(path)
    assert all(np.array_equal(a, b) for a, b in zip(back.matrices, T.matrices))


def test_vn_examples():
    lams = [np.array([0.2, 0.5]), np.array([0.4 + 0.1j, 0.7])]
    D = MatrixTuple([np.diag([p[i] for p in lams]) for i in range(2)])
    f = parse_poly("z1*z2 + 0.5", 2)
    res = vn_check(D, "fat_hartogs:2", f, samples=2048)
    assert res.lhs == pytest.approx(max(abs(f(p)) for p in lams))
    assert res.passed
    c = Poly.const(2, 0.7 - 0.2j)
    res = vn_check(PAIR, "fat_hartogs:2", c, samples=256)
    assert res.lhs == pytest.approx(abs(0.7 - 0.2j)) and res.passed
    assert vn_check(PAIR, "fat_hartogs:2", parse_poly("z1*z2", 2), samples=4096).passed


def test_vn_errors():
    outside = MatrixTuple([np.diag([0.9]), np.diag([0.5])])
    with pytest.raises(SpectrumOutsideDomain):
        vn_check(outside, "fat_hartogs:2", Poly.const(2, 1))
    # large nilpotent part at a point of small 1/kappa breaks positivity
    bad = MatrixTuple([[[0.05, 3.0], [0, 0.05]], [[0.1, 0.0], [0, 0.1]]])
    with pytest.raises(HypothesisFailed):
        vn_check(bad, "fat_hartogs:2", Poly.const(2, 1))


def test_operator_norm_matches_svd(rng):
    a = np.array([[rng.complex_normal() for _ in range(4)] for _ in range(4)])
    assert operator_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)


def test_fat_hartogs_series_is_diagonal():
    s = inv_kernel_series("fat_hartogs:2", 16)
    assert all(a == b for a, b in s.terms)
    T = PAIR
    manual = sum(c * T.power(a).conj().T @ T.power(a) for (a, _), c in s.terms.items())
    assert np.allclose(hereditary_eval(s, T).entries, manual)


def test_degree_stability_egg_small_spectrum():
    tuples = [T for T in random_tuples("egg:2", 60, seed=3)
              if all(np.abs(lam).max() <= 0.7 for lam in joint_spectrum(T))]
    assert len(tuples) > 30
    assert max(cap_stability(T, "egg:2") for T in tuples) <= 1e-6


@pytest.mark.parametrize("dom,closed", [("fat_hartogs:2", "fat_hartogs_closed:2"), ("egg:2", "egg_closed:2")])
def test_diagonal_error_is_series_tail(dom, closed):
    # near the boundary the cap-20 error is the geometric tail of the reciprocal series: omitted
    # terms have u-degree >= 19 and the polynomial prefactors have coefficient moduli summing to <= 50
    for lam in sample(dom, SampleConfig(6, seed=17, margin=0.1)):
        T = MatrixTuple([np.diag([lam[0]]), np.diag([lam[1]])])
        err = abs(hereditary_eval(inv_kernel_series(dom, 20), T).entries[0, 0] - 1 / eval_closed(closed, lam, lam))
        u = abs(lam[0]) ** 2
        assert err <= 50 * u ** 19 / (1 - u) + 1e-13


def test_fat_hartogs_cap_gap_is_series_tail():
    # the cap-16/cap-20 gap on a diagonal tuple equals the omitted Taylor terms exactly
    lam = np.array([0.6 + 0.2j, 0.75])
    T = MatrixTuple([np.diag([lam[0]]), np.diag([lam[1]])])
    gap = cap_stability(T, "fat_hartogs:2")
    u, s = abs(lam[0]) ** 2, abs(lam[1]) ** 2
    s16 = inv_kernel_series("fat_hartogs:2", 16)
    s20 = inv_kernel_series("fat_hartogs:2", 20)
    tail = sum(c * u ** a[0] * s ** a[1] for (a, _), c in s20.terms.items() if (a, a) not in s16.terms)
    assert gap == pytest.approx(abs(tail), rel=1e-8)


def test_random_tuples_admissible():
    for dom in ("fat_hartogs:2", "egg:2"):
        for T in random_tuples(dom, 30, seed=1):
            assert all(np.all(np.isfinite(t)) for t in T.matrices)
            ok, _ = check_hypothesis(T, dom)
            assert ok


def test_vn_random_battery():
    for i, T in enumerate(random_tuples("egg:2", 10, seed=2)):
        f = random_poly(2, 4, substream(8, i))
        assert vn_check(T, "egg:2", f, samples=1024, seed=i).passed
        assert np.allclose(poly_of_tuple(Poly.const(2, 2.0), T), 2 * np.eye(T.n))
