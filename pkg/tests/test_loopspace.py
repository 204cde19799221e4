import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axisorbits.loopspace import (LoopZ, ResolutionError, SymmetryClass, basis_matrices,
                                  full_series, harmonics, n_coeffs, project_symmetry, random_loop)

from conftest import TWO_PI

CLASSES = [SymmetryClass.ANTI_HALF, SymmetryClass.ODD]


def grid_integrals(loop: LoopZ, n: int = 1024):
    """(int z^2, int z'^2) by the trapezoid rule, exact for trigonometric polynomials."""
    _, z, dz = loop.sample_grid(n)
    w = loop.period / n
    return w * float(np.dot(z, z)), w * float(np.dot(dz, dz))


def test_coefficient_layout():
    assert list(harmonics(SymmetryClass.ODD, 4)[0]) == [1, 2, 3, 4]
    ks, is_cos = harmonics(SymmetryClass.ANTI_HALF, 5)
    assert list(ks) == [1, 1, 3, 3, 5, 5]
    assert list(is_cos) == [False, True] * 3
    assert n_coeffs(SymmetryClass.ANTI_HALF, 4) == 4


def test_pure_mode_evaluation():
    T = 3.0
    loop = LoopZ(T, "anti-half", 3, [0.0, 0.0, 0.0, 2.0])  # 2 cos(6 pi t / T)
    t = np.linspace(0.0, T, 17)
    z, dz = loop.evaluate(t)
    w = 6 * math.pi / T
    assert z == pytest.approx(2 * np.cos(w * t), abs=1e-14)
    assert dz == pytest.approx(-2 * w * np.sin(w * t), abs=1e-13)
    assert loop.second_derivative(t) == pytest.approx(-w * w * z, abs=1e-12)


@pytest.mark.parametrize("cls", CLASSES)
def test_grid_matches_direct_evaluation(cls):
    loop = random_loop(cls, 9, 0.7, seed=3, period=5.0)
    t, z, dz = loop.sample_grid(64)
    z2, dz2 = loop.evaluate(t)
    assert z == pytest.approx(z2, abs=1e-13)
    assert dz == pytest.approx(dz2, abs=1e-12)
    _, val, der, dd = basis_matrices(cls, 9, 5.0, 64)
    assert dd @ loop.coeffs == pytest.approx(loop.second_derivative(t), abs=1e-11)


@pytest.mark.parametrize("cls", CLASSES)
def test_membership(cls):
    for seed in range(20):
        loop = random_loop(cls, 16, 1.0, seed)
        assert loop.membership_residual() < 1e-13


def test_odd_loops_vanish_at_zero_and_half_period():
    loop = random_loop(SymmetryClass.ODD, 12, 1.0, seed=5, period=4.0)
    assert abs(loop.evaluate(0.0)[0]) < 1e-15
    assert abs(loop.evaluate(2.0)[0]) < 1e-13


def test_aliasing_guard():
    loop = random_loop(SymmetryClass.ODD, 16, 1.0, seed=0)
    with pytest.raises(ResolutionError):
        loop.sample_grid(32)
    loop.sample_grid(34)


@pytest.mark.parametrize("cls", CLASSES)
def test_projection_idempotent(cls):
    rng = np.random.default_rng(1)
    s, c = rng.normal(size=10), rng.normal(size=10)
    once = project_symmetry(s, c, cls, TWO_PI)
    twice = project_symmetry(*full_series(once), cls, TWO_PI)
    assert np.array_equal(once.coeffs, twice.coeffs)
    assert once.membership_residual() < 1e-12


def test_projection_keeps_admitted_modes_only():
    s = np.arange(1.0, 7.0)
    c = -np.arange(1.0, 7.0)
    anti = project_symmetry(s, c, "anti-half", TWO_PI)
    assert list(anti.coeffs) == [1.0, -1.0, 3.0, -3.0, 5.0, -5.0]
    odd = project_symmetry(s, c, "odd", TWO_PI)
    assert list(odd.coeffs) == list(s)


@pytest.mark.parametrize("cls", CLASSES)
def test_resize_preserves_function(cls):
    loop = random_loop(cls, 7, 1.0, seed=2)
    big = loop.resized(20)
    t = np.linspace(0.0, TWO_PI, 50)
    assert big.evaluate(t)[0] == pytest.approx(loop.evaluate(t)[0], abs=1e-14)
    assert np.array_equal(big.resized(7).coeffs, loop.coeffs)


def test_random_loop_deterministic_and_bounded():
    a = random_loop("anti-half", 8, 0.3, seed=42)
    b = random_loop("anti-half", 8, 0.3, seed=42)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, random_loop("anti-half", 8, 0.3, seed=43).coeffs)
    for cls in CLASSES:
        loop = random_loop(cls, 8, 0.3, seed=1)
        assert np.max(np.abs(loop.coeffs)) <= 0.3
        assert loop.sup_norm() <= 0.3 * 8
    with pytest.raises(ValueError):
        random_loop("odd", 4, 0.0, seed=0)


def test_parse_and_bad_input():
    assert SymmetryClass.parse("Lambda1") is SymmetryClass.ANTI_HALF
    assert SymmetryClass.parse("anti_half") is SymmetryClass.ANTI_HALF
    assert SymmetryClass.parse("ODD") is SymmetryClass.ODD
    with pytest.raises(ValueError):
        SymmetryClass.parse("even")
    with pytest.raises(ValueError):
        LoopZ(TWO_PI, "odd", 4, np.zeros(3))
    with pytest.raises(ValueError):
        LoopZ(-1.0, "odd", 1, [1.0])


@pytest.mark.parametrize("cls", CLASSES)
def test_parseval(cls):
    loop = random_loop(cls, 10, 1.0, seed=7, period=3.0)
    z2, dz2 = grid_integrals(loop)
    ks, _ = harmonics(cls, 10)
    assert z2 == pytest.approx(1.5 * np.sum(loop.coeffs**2), rel=1e-13)
    assert dz2 == pytest.approx(1.5 * np.sum((2 * math.pi * ks / 3.0 * loop.coeffs) ** 2),
                                rel=1e-13)


def test_poincare_wirtinger_random_loops():
    for seed in range(100):
        cls = CLASSES[seed % 2]
        T = 0.5 + seed / 10.0
        loop = random_loop(cls, 12, 1.0, seed, period=T)
        z2, dz2 = grid_integrals(loop)
        assert dz2 >= (2 * math.pi / T) ** 2 * z2 * (1 - 1e-12)


@pytest.mark.parametrize("cls", CLASSES)
def test_poincare_wirtinger_equality_on_fundamental(cls):
    T = 2.7
    loop = LoopZ(T, cls, 1, [0.8] + ([0.0] if cls is SymmetryClass.ANTI_HALF else []))
    z2, dz2 = grid_integrals(loop)
    assert abs(dz2 - (2 * math.pi / T) ** 2 * z2) < 1e-10 * dz2


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CLASSES), st.integers(1, 24), st.integers(0, 2**31 - 1),
       st.floats(0.1, 50.0))
def test_round_trip_dict(cls, K, seed, T):
    loop = random_loop(cls, K, 1.0, seed, T)
    back = LoopZ.from_dict(loop.to_dict())
    assert back.cls is loop.cls and back.K == K and back.period == T
    assert np.array_equal(back.coeffs, loop.coeffs)
    assert np.array_equal((-loop).coeffs, -loop.coeffs)


def test_spectrum_combines_pairs():
    loop = LoopZ(TWO_PI, "anti-half", 3, [3.0, 4.0, 0.0, 1.0])
    assert loop.spectrum() == [{"k": 1, "amplitude": 5.0}, {"k": 3, "amplitude": 1.0}]
