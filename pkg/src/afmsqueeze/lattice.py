"""Lattice geometry: structure factors, Brillouin-zone grids and
high-symmetry paths for the 2D square and honeycomb (hexagonal) lattices.

Momenta are handled as ``(..., 2)`` float arrays so that every function
vectorizes over grids; :class:`WaveVector` is the scalar convenience form.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError

SQRT3 = np.sqrt(3.0)

_COORDINATION = {"square": 4, "hexagonal": 3}


class WaveVector(NamedTuple):
    qx: float
    qy: float


@dataclass(frozen=True)
class LatticeSpec:
    """Bipartite 2D lattice.

    ``a_c`` is the nearest-neighbour distance. For ``hexagonal`` the
    neighbour vectors are (1, 0), (-1/2, ±√3/2) in units of ``a_c``.
    """

    kind: str = "square"
    a_c: float = 1.0
    z: int = field(default=None)

    def __post_init__(self):
        if self.kind not in _COORDINATION:
            raise ConfigurationError(
                f"lattice kind must be one of {sorted(_COORDINATION)}, got {self.kind!r}"
            )
        if self.z is None:
            object.__setattr__(self, "z", _COORDINATION[self.kind])
        if self.z != _COORDINATION[self.kind]:
            raise ConfigurationError(
                f"coordination z={self.z} inconsistent with {self.kind} lattice"
            )
        if not self.a_c > 0:
            raise ConfigurationError(f"lattice constant a_c must be > 0, got {self.a_c}")

    def reciprocal_vectors(self):
        """Primitive reciprocal vectors as rows of a (2, 2) array."""
        if self.kind == "square":
            return 2 * np.pi / self.a_c * np.eye(2)
        # Bravais vectors (3/2, -√3/2), (3/2, √3/2) in units of a_c
        b = 2 * np.pi / self.a_c
        return np.array([[b / 3, -b / SQRT3], [b / 3, b / SQRT3]])

    def special_points(self):
        """Labelled high-symmetry points of the first Brillouin zone."""
        a = self.a_c
        if self.kind == "square":
            pts = {"Γ": (0.0, 0.0), "X": (np.pi / a, 0.0), "M": (np.pi / a, np.pi / a)}
        else:
            pts = {
                "Γ": (0.0, 0.0),
                "K": (2 * np.pi / (3 * a), 2 * np.pi / (3 * SQRT3 * a)),
                "M": (2 * np.pi / (3 * a), 0.0),
            }
        return {k: np.array(v) for k, v in pts.items()}


@dataclass(frozen=True)
class BZPath:
    """Ordered labels of high-symmetry points; ``G`` is accepted for Γ.

    ``samples_per_segment`` is the number of intervals each segment is cut
    into, so a segment contributes that many new points.
    """

    labels: Sequence[str] = ("Γ", "X", "M", "Γ")
    samples_per_segment: int = 8

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(_canonical_label(s) for s in self.labels))
        if len(self.labels) < 2:
            raise ConfigurationError("a BZ path needs at least two points")
        if int(self.samples_per_segment) < 1:
            raise ConfigurationError("samples_per_segment must be >= 1")


def _canonical_label(label):
    label = str(label)
    return "Γ" if label.upper() in ("G", "GAMMA", "Γ") else label.upper()


class PathSamples(NamedTuple):
    q: np.ndarray  # (M, 2)
    s: np.ndarray  # cumulative arc length, (M,)
    ticks: tuple  # ((label, s), ...) at the vertices


class BZGrid(NamedTuple):
    q: np.ndarray  # (N, 2)
    weights: np.ndarray  # (N,), sums to 1


def _as_q(q):
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 2:
        raise ValueError(f"wave vectors need a trailing axis of length 2, got shape {q.shape}")
    return q


def structure_factor(spec: LatticeSpec, q):
    """Nearest-neighbour structure factor γ_q = z⁻¹ Σ_δ exp(i q·δ).

    Returns a complex scalar for a single wave vector, a complex array of
    shape ``q.shape[:-1]`` otherwise. Square-lattice values are real-valued
    complex numbers.
    """
    q = _as_q(q)
    a = spec.a_c
    qx, qy = q[..., 0], q[..., 1]
    if spec.kind == "square":
        gamma = (2.0 * (np.cos(a * qx) + np.cos(a * qy)) / spec.z).astype(complex)
    else:
        gamma = (
            np.exp(1j * a * qx)
            * (1.0 + 2.0 * np.exp(-1.5j * a * qx) * np.cos(SQRT3 * a * qy / 2.0))
            / spec.z
        )
    return gamma[()] if gamma.ndim == 0 else gamma


def structure_factor_longwave(spec: LatticeSpec, q):
    """Small-|q| expansion 1 - a_c² |q|² / 4 shared by both lattices."""
    q = _as_q(q)
    res = 1.0 - spec.a_c**2 * (q[..., 0] ** 2 + q[..., 1] ** 2) / 4.0
    return res[()] if np.ndim(res) == 0 else res


def high_symmetry_path(spec: LatticeSpec, path: BZPath) -> PathSamples:
    """Piecewise-linear path through labelled points.

    Vertices appear exactly once; the returned arc length is the Euclidean
    distance accumulated in q-space.
    """
    pts = spec.special_points()
    unknown = [lab for lab in path.labels if lab not in pts]
    if unknown:
        raise ConfigurationError(
            f"unknown high-symmetry label(s) {unknown} for {spec.kind} lattice; "
            f"valid: {sorted(pts)}"
        )
    n = int(path.samples_per_segment)
    vertices = [pts[lab] for lab in path.labels]
    chunks = [vertices[0][None, :]]
    for start, stop in zip(vertices[:-1], vertices[1:]):
        t = np.arange(1, n + 1)[:, None] / n
        chunks.append(start + t * (stop - start))
    q = np.vstack(chunks)
    steps = np.linalg.norm(np.diff(q, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(steps)])
    ticks = tuple((lab, float(s[i * n])) for i, lab in enumerate(path.labels))
    return PathSamples(q=q, s=s, ticks=ticks)


def bz_grid(spec: LatticeSpec, n_per_axis: int) -> BZGrid:
    """Uniform Monkhorst-Pack grid over the primitive reciprocal cell.

    Offsets are (2i - n - 1) / 2n along each reciprocal vector, so an even
    ``n_per_axis`` never samples Γ.
    """
    n = int(n_per_axis)
    if n < 1:
        raise ConfigurationError(f"n_per_axis must be >= 1, got {n_per_axis}")
    frac = (2 * np.arange(1, n + 1) - n - 1) / (2.0 * n)
    f1, f2 = np.meshgrid(frac, frac, indexing="ij")
    frac2 = np.stack([f1.ravel(), f2.ravel()], axis=1)
    q = frac2 @ spec.reciprocal_vectors()
    weights = np.full(n * n, 1.0 / (n * n))
    return BZGrid(q=q, weights=weights)
