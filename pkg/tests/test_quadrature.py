"""Shared kernels: stencils, periodic sums, refinement, DE quadrature."""

import numpy as np
import pytest

from berryline.errors import NotConverged, PathTooCoarse
from berryline.quadrature import (
    MAX_PHASE_STEP,
    PAD,
    fd4,
    pearson_line,
    refine_dyadically,
    spectral_derivative,
    tanh_sinh,
    trapezoid_periodic,
    unwrap_checked,
)


def _ghosted(func, x0, n, h):
    grid = x0 + h * np.arange(-PAD, n + PAD)
    return func(grid)


def test_fd4_exact_on_cubic():
    # The 5-point stencil has zero truncation error on polynomials up to
    # degree four, so a cubic must come out exact to roundoff.
    h = 0.1
    x = 0.3 + h * np.arange(11)
    poly = lambda t: t**3 - 2.0 * t**2 + 0.5 * t - 1.0
    got = fd4(_ghosted(poly, 0.3, 11, h), h)
    want = 3.0 * x**2 - 4.0 * x + 0.5
    assert np.max(np.abs(got - want)) < 1e-12


def test_fd4_fourth_order_on_sine():
    x0, n = 0.2, 17
    errs = []
    for h in (0.1, 0.05):
        x = x0 + h * np.arange(n)
        got = fd4(_ghosted(np.sin, x0, n, h), h)
        errs.append(np.max(np.abs(got - np.cos(x))))
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0


def test_fd4_complex_values():
    h = 0.01
    n = 9
    f = lambda t: np.exp(1j * t)
    got = fd4(_ghosted(f, 0.0, n, h), h)
    want = 1j * np.exp(1j * (h * np.arange(n)))
    assert np.max(np.abs(got - want)) < 1e-9


def test_trapezoid_periodic_sine_squared():
    n = 64
    x = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    assert abs(trapezoid_periodic(np.sin(x) ** 2, 2.0 * np.pi) - np.pi) < 1e-13


def test_trapezoid_periodic_spectral_accuracy():
    from scipy.special import i0

    # exp(cos x) integrates to 2 pi I0(1); an analytic periodic integrand
    # should hit machine precision already at 32 samples.
    x = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    got = trapezoid_periodic(np.exp(np.cos(x)), 2.0 * np.pi)
    assert abs(got - 2.0 * np.pi * i0(1.0)) < 1e-13


def test_trapezoid_periodic_batched():
    x = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    rows = np.stack([np.cos(x), np.cos(2 * x) + 1.0])
    got = trapezoid_periodic(rows, 2.0 * np.pi)
    assert got.shape == (2,)
    assert abs(got[0]) < 1e-14
    assert abs(got[1] - 2.0 * np.pi) < 1e-13


def test_spectral_derivative_analytic_periodic():
    x = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    got = spectral_derivative(np.exp(np.sin(x)), 2.0 * np.pi)
    want = np.cos(x) * np.exp(np.sin(x))
    assert np.max(np.abs(got - want)) < 1e-12


def test_spectral_derivative_complex_batched_period():
    period = 4.0
    x = np.linspace(0.0, period, 48, endpoint=False)
    w = 2.0 * np.pi / period
    rows = np.stack([np.exp(3j * w * x), np.cos(2.0 * w * x) + 1j * np.sin(w * x)])
    got = spectral_derivative(rows, period)
    want = np.stack([3j * w * np.exp(3j * w * x),
                     -2.0 * w * np.sin(2.0 * w * x) + 1j * w * np.cos(w * x)])
    assert got.shape == rows.shape
    assert np.max(np.abs(got - want)) < 1e-12


def test_spectral_derivative_drops_nyquist():
    # On an even grid the highest mode aliases between +-n/2 and carries no
    # sign information for a derivative, so it must be zeroed, not guessed.
    n = 16
    x = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    got = spectral_derivative(np.cos((n // 2) * x), 2.0 * np.pi)
    assert np.max(np.abs(got)) < 1e-12


def test_unwrap_checked_smooth_ramp():
    true = np.linspace(0.0, 7.0, 40)
    wrapped = np.angle(np.exp(1j * true))
    out = unwrap_checked(wrapped)
    assert np.max(np.abs(out - true)) < 1e-12


def test_unwrap_checked_rejects_wide_step():
    angles = [0.0, 0.1, 0.2, 2.2, 2.3]
    with pytest.raises(PathTooCoarse) as info:
        unwrap_checked(angles)
    assert info.value.index == 2


def test_unwrap_checked_step_just_below_limit():
    step = MAX_PHASE_STEP - 1e-3
    out = unwrap_checked(np.arange(5) * step % (2 * np.pi))
    assert out.size == 5


def test_refine_dyadically_settles():
    value, n, history = refine_dyadically(lambda n: 1.0 + 1.0 / n, 4, 1e-3, 1 << 20)
    assert n == 1024
    assert abs(value - (1.0 + 1.0 / 1024)) < 1e-15
    assert history[0] == (4, 1.25)
    assert history[-1][0] == 1024
    assert len(history) == 9


def test_refine_dyadically_raises_at_cap():
    flip = lambda n: 1.0 if n.bit_length() % 2 else -1.0
    with pytest.raises(NotConverged) as info:
        refine_dyadically(flip, 8, 1e-9, 64, context="flip test")
    assert [n for n, _ in info.value.history] == [8, 16, 32, 64]
    assert "flip test" in str(info.value)


def test_refine_dyadically_coarse_rungs_discarded():
    def evaluate(n):
        if n < 32:
            raise PathTooCoarse("too few", index=0)
        return 7.0

    value, n, history = refine_dyadically(evaluate, 4, 1e-6, 1 << 10)
    assert value == 7.0
    assert n == 64
    assert history == [(32, 7.0), (64, 7.0)]


def test_refine_dyadically_reset_forgets_previous():
    # A coarse failure must invalidate the value before it: convergence
    # here can only be declared from the pair (64, 128), not (16, 64).
    def evaluate(n):
        if n == 32:
            raise PathTooCoarse("hole", index=0)
        return 5.0

    _, n, _ = refine_dyadically(evaluate, 16, 1e-6, 1 << 10)
    assert n == 128


def test_tanh_sinh_smooth():
    got = tanh_sinh(lambda x, da, db: np.exp(x), 0.0, 1.0)
    assert abs(got - (np.e - 1.0)) < 1e-12


def test_tanh_sinh_sine_arch():
    assert abs(tanh_sinh(lambda x, da, db: np.sin(x), 0.0, np.pi) - 2.0) < 1e-12


def test_tanh_sinh_inverse_sqrt_endpoint():
    got = tanh_sinh(lambda x, da, db: 1.0 / np.sqrt(da), 0.0, 1.0)
    assert abs(got - 2.0) < 1e-11


def test_tanh_sinh_two_singular_endpoints():
    # 1/sqrt(x(1-x)) integrates to pi; needs the cancellation-free
    # endpoint distances, plain x*(1-x) would lose digits near 1.
    got = tanh_sinh(lambda x, da, db: 1.0 / np.sqrt(da * db), 0.0, 1.0)
    assert abs(got - np.pi) < 1e-11


def test_tanh_sinh_empty_interval():
    assert tanh_sinh(lambda x, da, db: np.exp(x), 1.0, 1.0) == 0.0


def test_tanh_sinh_non_integrable_divergence():
    with pytest.raises(NotConverged):
        tanh_sinh(lambda x, da, db: 1.0 / da, 0.0, 1.0)


def test_pearson_line_exact():
    x = np.linspace(-2.0, 5.0, 13)
    slope, intercept, corr = pearson_line(x, 3.0 * x - 2.0)
    assert abs(slope - 3.0) < 1e-12
    assert abs(intercept + 2.0) < 1e-12
    assert abs(corr - 1.0) < 1e-12


def test_pearson_line_noisy():
    rng = np.random.default_rng(91)
    x = np.linspace(0.0, 1.0, 200)
    y = -1.5 * x + 0.4 + 0.01 * rng.standard_normal(x.size)
    slope, intercept, corr = pearson_line(x, y)
    assert abs(slope + 1.5) < 0.02
    assert abs(intercept - 0.4) < 0.01
    assert corr < -0.999


def test_pearson_line_guards():
    with pytest.raises(ValueError):
        pearson_line([1.0], [2.0])
    with pytest.raises(ValueError):
        pearson_line([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
