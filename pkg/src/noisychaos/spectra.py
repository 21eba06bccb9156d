"""Energy spectra: random-matrix sampling, level-spacing statistics, JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class InvalidDimensionError(ValueError):
    """Hilbert-space dimension too small for the requested operation."""


class DegenerateSpectrumError(ValueError):
    """A level spacing is exactly zero; ratio statistics are undefined."""

    def __init__(self, index: int):
        super().__init__(f"zero level spacing at index {index}")
        self.index = index


@dataclass(frozen=True)
class Spectrum:
    """Ordered real energy levels of a D-dimensional system.

    Energies are sorted ascending on construction; ``dim >= 2``.
    """

    energies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise InvalidDimensionError(
                f"spectrum needs at least 2 levels, got shape {e.shape}"
            )
        e = np.sort(e)
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def mean_energy(self) -> float:
        return float(self.energies.mean())

    def gaps(self) -> np.ndarray:
        """Antisymmetric gap matrix E_ij = E_i - E_j."""
        e = self.energies
        return e[:, None] - e[None, :]

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "energies": self.energies.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        data = json.loads(text)
        spec = cls(np.asarray(data["energies"], dtype=float))
        if "dim" in data and int(data["dim"]) != spec.dim:
            raise ValueError(
                f"dim field {data['dim']} disagrees with {spec.dim} energies"
            )
        return spec

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Spectrum":
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class LevelStatistics:
    """Nearest-neighbour spacings s_n, ratios r_n = s_n/s_{n-1} and their
    min-folded variant in [0, 1]."""

    spacings: np.ndarray
    ratios: np.ndarray
    folded_ratios: np.ndarray
    mean_folded_ratio: float


def sample_gue_spectrum(dim: int, rng: np.random.Generator) -> Spectrum:
    """Sorted eigenvalues of a GUE matrix normalized so the semicircle
    support is approximately [-2, 2].

    Diagonal entries are real N(0, 1/dim); off-diagonal entries are complex
    with real and imaginary parts each N(0, 1/(2 dim)).
    """
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    x = rng.standard_normal((dim, dim))
    y = rng.standard_normal((dim, dim))
    a = (x + 1j * y) / np.sqrt(2.0)
    h = (a + a.conj().T) / np.sqrt(2.0 * dim)
    return Spectrum(np.linalg.eigvalsh(h))


def sample_goe_spectrum(dim: int, rng: np.random.Generator) -> Spectrum:
    """GOE analogue of :func:`sample_gue_spectrum` (real symmetric matrices)."""
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    x = rng.standard_normal((dim, dim))
    h = (x + x.T) / np.sqrt(2.0 * dim)
    return Spectrum(np.linalg.eigvalsh(h))


def level_statistics(spec: Spectrum) -> LevelStatistics:
    """Spacings, consecutive-spacing ratios and min-folded ratios.

    Raises :class:`DegenerateSpectrumError` if any spacing vanishes.
    """
    if spec.dim < 3:
        raise InvalidDimensionError(f"need dim >= 3 for ratios, got {spec.dim}")
    s = np.diff(spec.energies)
    zero = np.flatnonzero(s == 0.0)
    if zero.size:
        raise DegenerateSpectrumError(int(zero[0]))
    r = s[1:] / s[:-1]
    folded = np.minimum(r, 1.0 / r)
    return LevelStatistics(
        spacings=s,
        ratios=r,
        folded_ratios=folded,
        mean_folded_ratio=float(folded.mean()),
    )
