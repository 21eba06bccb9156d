"""Two-replica GUE channel U2(t) = e^{-i E_ijkl t} sum_a f_a(t) F_a.

The eight graph-group coefficients f_a are linear combinations of five
exponentials with rational coefficients.  The rationals are kept exact
(integer numerators over a common denominator) so that f(0) = (1, 0, ..., 0)
and the J = 0 limit hold exactly in floating point.  Graph groups are never
materialized; observables supply their 8-component contraction vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spectra import Spectrum


class UnsupportedDimensionError(ValueError):
    """D in {1, 2}: the printed coefficients have poles at D^2 = 1, 4."""


def f_matrix(D: int) -> list[list[Fraction]]:
    """Exact 8 x 5 coefficient matrix mapping the five exponentials
    (1, e^{-Jt}, e^{-(2-2/D)Jt}, e^{-2Jt}, e^{-(2+2/D)Jt}) to f_1..f_8."""
    if D < 3:
        raise UnsupportedDimensionError(f"need D >= 3, got {D}")
    F = Fraction
    return [
        [F(0), F(0), F(1, 4), F(1, 2), F(1, 4)],
        [
            F(0),
            F(D * D - 2, D * (D * D - 4)),
            F(-1, 4 * (D - 2)),
            F(-1, 2 * D),
            F(-1, 4 * (D + 2)),
        ],
        [F(0), F(0), F(-1, 4), F(0), F(1, 4)],
        [F(0), F(-1, D * D - 4), F(1, 4 * (D - 2)), F(0), F(-1, 4 * (D + 2))],
        [
            F(1, D * D - 1),
            F(-2, D * D - 4),
            F(1, 2 * (D - 1) * (D - 2)),
            F(0),
            F(1, 2 * (D + 1) * (D + 2)),
        ],
        [F(0), F(0), F(1, 4), F(-1, 2), F(1, 4)],
        [
            F(-1, D**3 - D),
            F(4, D * (D * D - 4)),
            F(-1, 2 * (D - 1) * (D - 2)),
            F(0),
            F(1, 2 * (D + 1) * (D + 2)),
        ],
        [F(0), F(2, D * (D * D - 4)), F(-1, 4 * (D - 2)), F(1, 2 * D), F(-1, 4 * (D + 2))],
    ]


def decay_rates(D: int, J: float) -> np.ndarray:
    """The five exponential rates (0, -J, -(2-2/D)J, -2J, -(2+2/D)J)."""
    return np.array(
        [0.0, -J, -(2.0 - 2.0 / D) * J, -2.0 * J, -(2.0 + 2.0 / D) * J]
    )


def _integer_rows(D: int):
    """Per-row integer numerators and common denominator of f_matrix."""
    rows = f_matrix(D)
    nums = np.zeros((8, 5), dtype=float)
    dens = np.zeros(8)
    for a, row in enumerate(rows):
        q = math.lcm(*[frac.denominator for frac in row])
        dens[a] = q
        for b, frac in enumerate(row):
            nums[a, b] = frac.numerator * (q // frac.denominator)
    return nums, dens


def f_coefficients(D: int, J: float, t: float) -> np.ndarray:
    """The eight coefficients f_a(t); f(0) = (1, 0, ..., 0) exactly.

    The exponent row sums vanish exactly in integer arithmetic, so both
    t = 0 and J = 0 give the identity coefficients without roundoff.
    """
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    nums, dens = _integer_rows(D)
    exps = np.exp(decay_rates(D, J) * t)
    return (nums @ exps) / dens


def build_M(D: int, J: float, w: complex) -> np.ndarray:
    """The 8 x 8 generator on graph-group coefficients: L2.F_a = M_ba F_b."""
    if D < 3:
        raise UnsupportedDimensionError(f"need D >= 3, got {D}")
    j = J / D
    m = np.array(
        [
            [0, 0, -2 * j, 0, 0, 0, 0, 0],
            [j, J, 0, 0, 0, 0, 0, 0],
            [-j, 0, 0, 0, 0, -j, 0, 0],
            [0, 0, j, J, 0, 0, 0, 0],
            [0, 2 * j, 0, 0, 2 * J, 0, 0, 2 * j],
            [0, 0, -2 * j, 0, 0, 0, 0, 0],
            [0, 0, 0, 4 * j, 0, 0, 2 * J, 0],
            [0, 0, 0, 0, 0, j, 0, J],
        ],
        dtype=complex,
    )
    m += w * np.eye(8)
    return m


@dataclass(frozen=True)
class ChannelTwo:
    """Two-replica channel: spectral phase plus the eight f_a(t), evaluated
    on demand; graph groups are contracted by the observable functions."""

    spectrum: Spectrum
    J: float

    @property
    def dim(self) -> int:
        return self.spectrum.dim

    def f(self, t: float) -> np.ndarray:
        return f_coefficients(self.dim, self.J, t)

    def phase(self, i: int, j: int, k: int, l: int, t: float) -> complex:
        """e^{-i E_ijkl t} with E_ijkl = E_i - E_j + E_k - E_l."""
        e = self.spectrum.energies
        return complex(np.exp(-1j * (e[i] - e[j] + e[k] - e[l]) * t))


@dataclass(frozen=True)
class SffVariance:
    """Second moment E[(TrU TrU+)^2] and the variance against (D^2 K_J)^2."""

    second_moment: float
    variance: float


def sff_contraction_vector(spec: Spectrum, t: float) -> np.ndarray:
    """V_a(SFF): the eight graph groups contracted for the squared SFF,
    built from the noiseless traces."""
    d = spec.dim
    tr1 = np.exp(-1j * spec.energies * t).sum()
    tr2 = np.exp(-2j * spec.energies * t).sum()
    k1 = abs(tr1) ** 2 / d**2
    k2 = abs(tr2) ** 2 / d**2
    v3 = tr2 * np.conj(tr1) ** 2
    return np.array(
        [
            d**4 * k1**2,
            4 * d**3 * k1,
            (v3 + np.conj(v3)).real,
            8 * d**2 * k1,
            2 * d**2,
            d**2 * k2,
            2 * d,
            4 * d,
        ]
    )


def sff_squared_mean(spec: Spectrum, J: float, t: float) -> float:
    """E[(TrU_t TrU_t+)^2] = sum_a f_a(t) V_a(SFF)."""
    f = f_coefficients(spec.dim, J, t)
    return float(f @ sff_contraction_vector(spec, t))


def sff_variance(spec: Spectrum, J: float, t: float) -> SffVariance:
    """Second moment of TrU TrU+ and its variance.

    The mean uses the single-replica closed form
    E[TrU TrU+] = D^2 K_J(t).
    """
    d = spec.dim
    second = sff_squared_mean(spec, J, t)
    k0 = abs(np.exp(-1j * spec.energies * t).sum()) ** 2 / d**2
    k_j = math.exp(-J * t) * k0 - math.expm1(-J * t) / d**2
    return SffVariance(second, second - (d**2 * k_j) ** 2)


def _check_operator(name: str, op: np.ndarray, d: int) -> None:
    if op.shape != (d, d):
        raise ValueError(f"{name} shape {op.shape} != ({d}, {d})")
    if not np.allclose(op, op.conj().T, atol=1e-10):
        raise ValueError(f"{name} must be Hermitian")
    if abs(np.trace(op)) > 1e-10:
        raise ValueError(f"{name} must be traceless, got trace {np.trace(op)}")


def heisenberg_noiseless(spec: Spectrum, op: np.ndarray, t: float) -> np.ndarray:
    """B_t = e^{iH0 t} B e^{-iH0 t} in the energy eigenbasis (phase grid)."""
    phase = np.exp(1j * spec.gaps() * t)
    return phase * op


def otoc_noiseless(spec: Spectrum, t: float, A: np.ndarray, B: np.ndarray) -> complex:
    """(1/D) Tr(A B_t A B_t) for the noiseless diagonal Hamiltonian."""
    bt = heisenberg_noiseless(spec, B, t)
    return complex(np.trace(A @ bt @ A @ bt) / spec.dim)


def otoc(
    spec: Spectrum, J: float, t: float, A: np.ndarray, B: np.ndarray
) -> complex:
    """Noise-averaged infinite-temperature OTOC for traceless Hermitian A, B.

    Only the groups 1, 3 and 6 survive the traceless contraction:

        OTOC_J = (f1 + f6) OTOC_{J=0} + (2/D) f3 Tr(A B_t)^2

    with f1 + f6 = e^{-2Jt} cosh(2Jt/D) and
    2 f3 = -e^{-2Jt} sinh(2Jt/D), derived from the coefficient matrix rows.
    """
    d = spec.dim
    _check_operator("A", A, d)
    _check_operator("B", B, d)
    f = f_coefficients(d, J, t)
    bt = heisenberg_noiseless(spec, B, t)
    otoc0 = complex(np.trace(A @ bt @ A @ bt) / d)
    tr_ab = complex(np.trace(A @ bt))
    return (f[0] + f[5]) * otoc0 + (2.0 / d) * f[2] * tr_ab**2
