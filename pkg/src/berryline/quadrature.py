"""Shared numerical kernels.

Finite differences on ghost-padded grids, trapezoid sums on uniform
periodic grids, a dyadic refinement driver, double-exponential quadrature
for endpoint singularities, guarded phase unwrapping, and a plain Pearson
line fit. Everything here is deterministic: no adaptive randomness, fixed
node layouts, so repeated runs give identical bits.
"""

import numpy as np

from .errors import NotConverged, PathTooCoarse

# Ghost samples on each side of a padded array, enough for the 5-point stencil.
PAD = 2

# A phase step this large between neighbouring samples means the unwrap is
# no longer trustworthy and the grid has to be refined.
MAX_PHASE_STEP = 0.5 * np.pi


def fd4(padded, h):
    """Fourth-order central derivative of samples with PAD ghosts per side.

    ``padded`` has shape (..., N + 2*PAD); the result has shape (..., N) and
    holds the derivative at the interior samples.
    """
    f = np.asarray(padded)
    n = f.shape[-1] - 2 * PAD
    m2 = f[..., 0:n]
    m1 = f[..., 1:n + 1]
    p1 = f[..., 3:n + 3]
    p2 = f[..., 4:n + 4]
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)


def spectral_derivative(samples, period, axis=-1):
    """Derivative of smooth samples covering exactly one period, by FFT.

    Truncation decays exponentially with the sample count for analytic
    inputs, so the rounding floor is reached at far coarser grids than a
    finite-difference stencil allows. The unmatched Nyquist mode of even
    grids is dropped; it carries no usable derivative information.
    """
    f = np.asarray(samples)
    n = f.shape[axis]
    wave = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        wave[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    factor = (2j * np.pi / period) * wave.reshape(shape)
    return np.fft.ifft(np.fft.fft(f, axis=axis) * factor, axis=axis)


def trapezoid_periodic(values, period):
    """Trapezoid sum of uniform samples covering exactly one period.

    On a periodic grid the trapezoid rule degenerates to the plain mean,
    which converges spectrally for analytic integrands.
    """
    v = np.asarray(values)
    return v.sum(axis=-1) * (period / v.shape[-1])


def unwrap_checked(raw_angles):
    """np.unwrap plus a sanity guard on the spacing of the result.

    Raises PathTooCoarse when any unwrapped step reaches pi/2, since at
    that point aliasing by a full turn can no longer be excluded.
    """
    out = np.unwrap(np.asarray(raw_angles, dtype=float))
    if out.size > 1:
        steps = np.abs(np.diff(out))
        worst = int(np.argmax(steps))
        if steps[worst] >= MAX_PHASE_STEP:
            raise PathTooCoarse(
                f"phase step {steps[worst]:.3f} rad at sample {worst} "
                "exceeds pi/2; refine the grid",
                index=worst,
            )
    return out


def refine_dyadically(evaluate, n0, tol, cap, context=""):
    """Run ``evaluate(n)`` over n = n0, 2 n0, ... until values settle.

    Convergence means two successive values differ by less than ``tol``
    (absolute). PathTooCoarse from the evaluator discards the rung and
    continues doubling. Returns ``(value, n, history)`` where history is
    the list of (n, value) pairs actually evaluated; raises NotConverged
    carrying that history when n would exceed ``cap``.
    """
    history = []
    previous = None
    n = int(n0)
    while n <= cap:
        try:
            value = evaluate(n)
        except PathTooCoarse:
            previous = None
            n *= 2
            continue
        history.append((n, value))
        if previous is not None and abs(value - previous) < tol:
            return value, n, history
        previous = value
        n *= 2
    raise NotConverged(
        f"{context or 'dyadic refinement'} did not settle below {tol:g} "
        f"within N={cap}",
        history=history,
    )


def tanh_sinh(f, a, b, tol=1e-12, max_level=13):
    """Double-exponential quadrature of f over (a, b).

    Handles integrable endpoint singularities such as inverse square
    roots. The integrand is called as ``f(x, da, db)`` with vectorized
    node positions ``x`` and their distances ``da = x - a``, ``db = b - x``
    computed in a cancellation-free way, so f can resolve a singular
    factor right down to the endpoint. Non-integrable divergences show up
    as stalled refinement and raise NotConverged.
    """
    half = 0.5 * (b - a)
    if half <= 0.0:
        return 0.0
    t_max = 3.9
    previous = None
    history = []
    for level in range(2, max_level + 1):
        n = 2 ** level
        t = np.linspace(-t_max, t_max, 2 * n + 1)
        u = 0.5 * np.pi * np.sinh(t)
        au = np.abs(u)
        e2 = np.exp(-2.0 * au)
        near = 2.0 * e2 / (1.0 + e2)        # 1 - |tanh(u)|, accurate for large |u|
        far = 2.0 / (1.0 + e2)              # 1 + |tanh(u)|
        da = half * np.where(u >= 0.0, far, near)
        db = half * np.where(u >= 0.0, near, far)
        x = np.where(u >= 0.0, b - db, a + da)
        sech2 = (2.0 / (np.exp(au) + np.exp(-au))) ** 2
        w = half * 0.5 * np.pi * np.cosh(t) * sech2
        step = t[1] - t[0]
        value = step * np.sum(w * f(x, da, db))
        history.append((level, value))
        if previous is not None and abs(value - previous) <= max(tol, tol * abs(value)):
            return value
        previous = value
    raise NotConverged(
        "double-exponential refinement stalled; the integrand likely has a "
        "non-integrable endpoint divergence",
        history=history,
    )


def pearson_line(x, y):
    """Least-squares line fit. Returns (slope, intercept, correlation)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    mx, my = x.mean(), y.mean()
    dx, dy = x - mx, y - my
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    sxy = float(np.dot(dx, dy))
    if sxx == 0.0:
        raise ValueError("degenerate fit, all x identical")
    slope = sxy / sxx
    intercept = my - slope * mx
    corr = sxy / np.sqrt(sxx * syy) if syy > 0.0 else 1.0
    return slope, intercept, float(corr)
