"""Independent oracles shared by the test modules.

Every function here reaches a target quantity by a route the library
does not use: arithmetic-geometric-mean iteration and scipy adaptive
quadrature for the elliptic integrals, characteristic-polynomial roots
for eigenvalues, Pauli-matrix assembly for the two-level Hamiltonian,
and dense unwrapped sampling for windings. Agreement between these and
the library is evidence, not tautology.
"""

import cmath
import math

import numpy as np
from scipy import integrate

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def agm_k(y):
    """Complete elliptic integral K via AGM iteration, ~1e-15 accurate."""
    a, b = 1.0, math.sqrt(1.0 - y)
    for _ in range(40):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def quad_k(y):
    value, _ = integrate.quad(
        lambda t: 1.0 / math.sqrt(1.0 - y * math.sin(t) ** 2),
        0.0, math.pi / 2.0, epsabs=1e-13, epsrel=1e-13)
    return value


def quad_pi(x, y):
    value, _ = integrate.quad(
        lambda t: 1.0 / ((1.0 - x * math.sin(t) ** 2)
                         * math.sqrt(1.0 - y * math.sin(t) ** 2)),
        0.0, math.pi / 2.0, epsabs=1e-13, epsrel=1e-13)
    return value


def char_poly_eigs(matrix):
    """Eigenvalues as roots of z^2 - tr z + det, ordered like eig2."""
    m = np.asarray(matrix, dtype=complex)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    roots = np.roots([1.0, -tr, det])
    return sorted(roots, key=lambda z: (-z.real, -z.imag))


def assemble_two_level(p, phi):
    """Two-level matrix from the Pauli decomposition, term by term.

    The Hermitian part is the field vector contracted with the Pauli
    matrices on the sweep direction; the gain/loss part is written as
    three literal 2x2 blocks. No shared code with the library's
    coefficient-based construction.
    """
    sx, sy, cz = (math.sin(p.theta) * math.cos(phi),
                  math.sin(p.theta) * math.sin(phi),
                  math.cos(p.theta))
    herm = p.h_x * sx * SIGMA_X + p.h_y * sy * SIGMA_Y + p.h_z * cz * SIGMA_Z
    loss = (p.d_x * sx * np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
            + p.d_y * sy * np.array([[0.0, -1.0j], [-1.0j, 0.0]], dtype=complex)
            + p.d_z * cz * np.array([[1.0j, 0.0], [0.0, -1.0j]], dtype=complex))
    return herm + loss


def dense_winding(values_fn, n=1 << 16):
    """Winding number of a complex path by dense unwrapped sampling."""
    grid = np.linspace(0.0, 2.0 * math.pi, n + 1)
    phases = np.unwrap(np.angle(values_fn(grid)))
    return (phases[-1] - phases[0]) / (2.0 * math.pi)


def bloch_matrix(v, v_prime, gamma, k, eps_a=0.0):
    """Bipartite Bloch matrix assembled directly, for cross-checks."""
    vk = v + v_prime * cmath.exp(-1j * k)
    return np.array([[eps_a, vk], [np.conj(vk), eps_a - 2j * gamma]],
                    dtype=complex)


def draw_two_level(rng, sign_region):
    """Random two-level parameters with both amplitudes clear of the lines.

    ``sign_region`` "positive" puts both gain/loss amplitudes on the same
    side of their field magnitudes (index 1); "negative" mixes the sides
    (index 0). Margins stay at least 0.07 from the singular set.
    """
    h_x = rng.uniform(0.5, 3.0)
    h_y = rng.uniform(0.5, 3.0)
    if sign_region == "positive":
        if rng.integers(2) == 0:
            d_x = rng.uniform(0.0, h_x - 0.07)
            d_y = rng.uniform(0.0, h_y - 0.07)
        else:
            d_x = rng.uniform(h_x + 0.07, h_x + 3.0)
            d_y = rng.uniform(h_y + 0.07, h_y + 3.0)
    elif sign_region == "negative":
        if rng.integers(2) == 0:
            d_x = rng.uniform(0.0, h_x - 0.07)
            d_y = rng.uniform(h_y + 0.07, h_y + 3.0)
        else:
            d_x = rng.uniform(h_x + 0.07, h_x + 3.0)
            d_y = rng.uniform(0.0, h_y - 0.07)
    else:
        raise ValueError(sign_region)
    from berryline import TwoLevelParams
    return TwoLevelParams(h_x=h_x, h_y=h_y, h_z=rng.uniform(-1.0, 1.0),
                          d_x=d_x, d_y=d_y, d_z=rng.uniform(-1.0, 1.0),
                          theta=rng.uniform(0.1, math.pi - 0.1))


def draw_bipartite(rng, region):
    """Random (q, eta) inside one gapped region, clear of its borders."""
    if region == "TYPE_I":
        q = rng.uniform(0.2, 3.0)
        while abs(q - 1.0) < 0.15:
            q = rng.uniform(0.2, 3.0)
        eta = rng.uniform(0.0, 0.9 * abs(q - 1.0))
    elif region == "TYPE_II":
        q = rng.uniform(0.2, 3.0)
        eta = rng.uniform(1.1 * (q + 1.0), 1.1 * (q + 1.0) + 1.0)
    else:
        raise ValueError(region)
    return q, eta
