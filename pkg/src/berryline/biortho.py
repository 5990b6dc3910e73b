"""Biorthogonal eigen-decomposition of 2x2 complex matrices.

A non-Hermitian matrix has distinct left and right eigenvectors. Here they
are paired and scaled so that <lambda_i|psi_j> = delta_ij, with the left
vectors stored as kets of the adjoint matrix. The decomposition is closed
form (quadratic roots), which keeps residuals at roundoff for well
separated eigenvalues, and a tracking helper keeps band labels continuous
along discrete parameter paths.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DefectiveMatrix, DegenerateSpectrum, PathTooCoarse

# Gap below this fraction of the matrix scale counts as a degeneracy.
DEGENERACY_RTOL = 1e-9

# Left/right pairing weaker than this means the eigenvector matrix is
# numerically singular and biorthogonal normalization would blow up.
_PAIRING_TOL = 1e-6

_CONSTRUCTION_TOL = 1e-10

# Per-step dominant-overlap share required while tracking a path.
_TRACK_SHARE = 0.9

_BAND_INDEX = {
    "plus": 0, "+": 0, 1: 0, +1: 0,
    "minus": 1, "-": 1, -1: 1,
}


def band_index(band):
    """Map a band label ('plus'/'minus', +1/-1) to the storage index."""
    try:
        return _BAND_INDEX[band]
    except (KeyError, TypeError):
        raise ValueError(f"unknown band label {band!r}") from None


@dataclass(frozen=True)
class ComplexMatrix2:
    """2x2 complex matrix stored row-major as four scalars."""

    a11: complex
    a12: complex
    a21: complex
    a22: complex

    def __post_init__(self):
        for name in ("a11", "a12", "a21", "a22"):
            value = complex(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"matrix entry {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, arr):
        a = np.asarray(arr, dtype=complex)
        if a.shape != (2, 2):
            raise ValueError(f"expected shape (2, 2), got {a.shape}")
        return cls(a[0, 0], a[0, 1], a[1, 0], a[1, 1])

    def as_array(self):
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=complex)

    def dagger(self):
        """Conjugate transpose."""
        return ComplexMatrix2(
            np.conj(self.a11), np.conj(self.a21),
            np.conj(self.a12), np.conj(self.a22),
        )

    def frobenius(self):
        return float(np.sqrt(
            abs(self.a11) ** 2 + abs(self.a12) ** 2
            + abs(self.a21) ** 2 + abs(self.a22) ** 2
        ))


@dataclass(frozen=True)
class BiorthoEigenSystem:
    """Eigenvalues with paired right and left eigenvectors.

    ``eigenvalues[0]`` belongs to the first band, ``eigenvalues[1]`` to the
    second. Columns of ``right_vectors`` are the kets |psi_i>; columns of
    ``left_vectors`` are kets of the adjoint matrix, so the bra <lambda_i|
    is the conjugate transpose of column i, normalized to
    <lambda_i|psi_j> = delta_ij.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray

    def eigenvalue(self, band):
        return complex(self.eigenvalues[band_index(band)])

    def right(self, band):
        return self.right_vectors[:, band_index(band)].copy()

    def left(self, band):
        return self.left_vectors[:, band_index(band)].copy()

    def gap(self):
        return abs(complex(self.eigenvalues[0]) - complex(self.eigenvalues[1]))

    def metrics(self, matrix):
        """Residual and biorthogonality defects against a source matrix.

        Returns a dict with 'residual' (worst ||H psi - E psi||) and
        'biortho' (worst |<lambda_i|psi_j> - delta_ij|).
        """
        h = matrix.as_array()
        residual = 0.0
        for i in range(2):
            psi = self.right_vectors[:, i]
            residual = max(residual, float(np.linalg.norm(h @ psi - self.eigenvalues[i] * psi)))
        overlap = self.left_vectors.conj().T @ self.right_vectors
        biortho = float(np.max(np.abs(overlap - np.eye(2))))
        return {"residual": residual, "biortho": biortho}

    def swapped(self):
        """Same decomposition with the band order exchanged."""
        return BiorthoEigenSystem(
            eigenvalues=self.eigenvalues[::-1].copy(),
            right_vectors=self.right_vectors[:, ::-1].copy(),
            left_vectors=self.left_vectors[:, ::-1].copy(),
        )


def _direction(c0, c1, scale):
    """Pick the better conditioned of two candidate (c0, c1) vectors."""
    v = np.array(c0 if abs(c0[0]) + abs(c0[1]) >= abs(c1[0]) + abs(c1[1]) else c1,
                 dtype=complex)
    norm = np.linalg.norm(v)
    if norm <= 1e-14 * scale:
        raise DefectiveMatrix("no usable eigendirection at this eigenvalue")
    return v / norm


def eig2(matrix):
    """Closed-form biorthogonal eigen-system of a 2x2 complex matrix.

    Eigenvalues are ordered by descending real part, ties broken by
    descending imaginary part. Right vectors have unit norm with their
    largest-modulus component rotated real positive; left vectors are
    rescaled against them so the pairing is exactly biorthonormal.

    Raises DegenerateSpectrum when the gap falls below
    ``DEGENERACY_RTOL * max(1, ||H||_F)`` and the matrix is a multiple of
    the identity, DefectiveMatrix when the coalescence leaves a single
    eigendirection or the left/right pairing is numerically singular.
    """
    h = matrix.as_array()
    scale = max(1.0, matrix.frobenius())
    mean = 0.5 * (h[0, 0] + h[1, 1])
    det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    s = np.sqrt(complex(mean * mean - det))
    e_hi, e_lo = mean + s, mean - s
    if (e_hi.real, e_hi.imag) < (e_lo.real, e_lo.imag):
        e_hi, e_lo = e_lo, e_hi
    gap = abs(e_hi - e_lo)
    if gap <= DEGENERACY_RTOL * scale:
        off = max(abs(h[0, 1]), abs(h[1, 0]),
                  abs(h[0, 0] - mean), abs(h[1, 1] - mean))
        if off <= DEGENERACY_RTOL * scale:
            raise DegenerateSpectrum(
                f"eigenvalues coincide, gap {gap:.3e} on a scalar matrix", gap=gap)
        raise DefectiveMatrix(
            f"coalescent eigenvalues (gap {gap:.3e}) with a single eigendirection")

    rights = []
    lefts = []
    for e in (e_hi, e_lo):
        psi = _direction((h[0, 1], e - h[0, 0]), (e - h[1, 1], h[1, 0]), scale)
        k = int(np.argmax(np.abs(psi)))
        phase = psi[k] / abs(psi[k])
        psi = psi / phase
        row = _direction((h[1, 0], e - h[0, 0]), (e - h[1, 1], h[0, 1]), scale)
        pairing = row @ psi
        if abs(pairing) <= _PAIRING_TOL:
            raise DefectiveMatrix(
                f"left/right pairing {abs(pairing):.3e} is numerically singular")
        lam = np.conj(row) / np.conj(pairing)
        rights.append(psi)
        lefts.append(lam)

    system = BiorthoEigenSystem(
        eigenvalues=np.array([e_hi, e_lo]),
        right_vectors=np.column_stack(rights),
        left_vectors=np.column_stack(lefts),
    )
    checks = system.metrics(matrix)
    if checks["residual"] > _CONSTRUCTION_TOL * scale or checks["biortho"] > _CONSTRUCTION_TOL:
        raise DefectiveMatrix(
            "eigen-system failed construction checks "
            f"(residual {checks['residual']:.3e}, biortho {checks['biortho']:.3e})")
    return system


def _discriminant(h):
    mean = 0.5 * (h[0, 0] + h[1, 1])
    det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    return mean * mean - det


def _crossing_in_gap(ha, hb, index, share):
    """Decide whether a tracking failure hides a crossing inside a step.

    The squared half-gap of the linear matrix pencil between two samples
    is an exact quadratic in the interpolation parameter (trace linear,
    determinant quadratic), so its complex roots are known in closed form.
    A genuine degeneracy puts a root on or vanishingly near the real
    segment t in [0, 1]; an avoided crossing leaves both roots well off
    it. The distance is measured in t itself, which makes the verdict
    independent of the overall matrix scale.
    """
    p0 = _discriminant(ha)
    p2 = _discriminant(hb)
    p1 = _discriminant(0.5 * (ha + hb))
    a = 2.0 * (p0 - 2.0 * p1 + p2)
    b = -(3.0 * p0 - 4.0 * p1 + p2)
    c = p0
    size = max(abs(p0), abs(p1), abs(p2))
    norm2 = max(float(np.linalg.norm(ha)), float(np.linalg.norm(hb)), 1.0) ** 2
    if size <= 1e-24 * norm2:
        # Discriminant is zero across the whole step to roundoff.
        raise DegenerateSpectrum(
            f"bands cross between path samples {index} and {index + 1}",
            index=index, gap=2.0 * np.sqrt(size))
    if abs(a) > 1e-13 * size:
        root_disc = np.sqrt(complex(b * b - 4.0 * a * c))
        roots = [(-b + root_disc) / (2.0 * a), (-b - root_disc) / (2.0 * a)]
    elif abs(b) > 1e-13 * size:
        roots = [complex(-c / b)]
    else:
        roots = []
    best = None
    for z in roots:
        overshoot = max(0.0, -z.real, z.real - 1.0)
        dist = float(np.hypot(overshoot, z.imag))
        if best is None or dist < best[0]:
            best = (dist, min(max(z.real, 0.0), 1.0))
    if best is not None and best[0] <= 0.05:
        t_hit = best[1]
        pinch = abs(a * t_hit * t_hit + b * t_hit + c)
        raise DegenerateSpectrum(
            f"bands cross between path samples {index} and {index + 1}",
            index=index, gap=2.0 * np.sqrt(pinch))
    raise PathTooCoarse(
        f"band overlap share {share:.3f} below {_TRACK_SHARE} between samples "
        f"{index} and {index + 1} with no crossing in between; refine the path",
        index=index, overlap=share)


def track_along_path(matrices):
    """Eigen-systems along a discrete path with continuous band labels.

    Band labels at each step follow maximal biorthogonal overlap with the
    previous step: the pairing (identity or swap) with the larger overlap
    product wins, and each band's dominant overlap share must reach 0.9.
    On a failed step the interval is analyzed: DegenerateSpectrum if the
    interpolated spectrum passes through a crossing inside it, otherwise
    PathTooCoarse. Per-sample failures of eig2 are re-raised with the
    sample index attached.
    """
    mats = list(matrices)
    if not mats:
        raise ValueError("empty path")
    systems = []
    for i, m in enumerate(mats):
        try:
            current = eig2(m)
        except (DegenerateSpectrum, DefectiveMatrix) as exc:
            exc.index = i
            raise
        if systems:
            previous = systems[-1]
            overlap = previous.left_vectors.conj().T @ current.right_vectors
            a = np.abs(overlap)
            keep = a[0, 0] * a[1, 1]
            swap = a[0, 1] * a[1, 0]
            if swap > keep:
                current = current.swapped()
                a = a[:, ::-1]
            rows = np.sqrt(a[:, 0] ** 2 + a[:, 1] ** 2)
            shares = np.array([a[0, 0], a[1, 1]]) / np.where(rows > 0.0, rows, 1.0)
            share = float(np.min(shares))
            if share < _TRACK_SHARE:
                _crossing_in_gap(mats[i - 1].as_array(), m.as_array(), i - 1, share)
        systems.append(current)
    return systems
