"""Stochastic-trajectory oracle for the averaged channels.

Each trajectory evolves U(t_{n+1}) = exp(-i (H0 + eta_n) dt) U(t_n) with an
exact (eigendecomposition) Hermitian exponential, eta_n drawn from the
regularized noise model.  Trajectories get independent child seeds from a
splittable SeedSequence and results land in per-trajectory slots before a
fixed-order reduction, so estimates are bit-identical regardless of thread
count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diagnostics import DiagnosticSeries, _meta
from .noise import NoiseModel, sample_noise_sequence
from .spectra import Spectrum


class UnitarityError(RuntimeError):
    """Unitarity drifted beyond tolerance (step too large)."""


@dataclass(frozen=True)
class TrajectoryConfig:
    """Discretization and ensemble-size parameters for the oracle."""

    dt: float
    t_max: float
    n_traj: int
    seed: int
    scheme: str = "exp_step"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_max <= 0.0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.n_traj < 1:
            raise ValueError(f"n_traj must be positive, got {self.n_traj}")
        if self.scheme != "exp_step":
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class EnsembleEstimate:
    mean: complex
    stderr: float
    n: int


def validate_step(model: NoiseModel, dt: float) -> None:
    """Hard validity bound on the regularized variance: dt |lambda|_inf D <= 1."""
    lam_max = float(np.max(model.lambda_matrix()))
    if dt * lam_max * model.dim > 1.0:
        raise ValueError(
            f"dt={dt} too large for |lambda|_inf={lam_max}, D={model.dim}: "
            "regularized variance exceeds perturbative validity"
        )


def trajectory_generators(seed: int, n_traj: int) -> list[np.random.Generator]:
    """Independent per-trajectory generators from a splittable seed."""
    children = np.random.SeedSequence(seed).spawn(n_traj)
    return [np.random.default_rng(c) for c in children]


def _evolve_recorded(
    energies: np.ndarray,
    model: NoiseModel,
    dt: float,
    record_steps: np.ndarray,
    gens: list[np.random.Generator],
) -> np.ndarray:
    """Evolve a batch of trajectories, returning U at the recorded step
    indices with shape (n_batch, n_record, D, D)."""
    d = energies.size
    n_steps = int(record_steps.max())
    batch = len(gens)
    eta = np.empty((batch, n_steps, d, d), dtype=complex)
    for b, gen in enumerate(gens):
        eta[b] = sample_noise_sequence(model, dt, n_steps, gen)
    u = np.broadcast_to(np.eye(d, dtype=complex), (batch, d, d)).copy()
    out = np.empty((batch, record_steps.size, d, d), dtype=complex)
    rec = {step: k for k, step in enumerate(record_steps)}
    if 0 in rec:
        out[:, rec[0]] = u
    h0 = np.diag(energies.astype(complex))
    for n in range(1, n_steps + 1):
        h = h0 + eta[:, n - 1]
        evals, evecs = np.linalg.eigh(h)
        phases = np.exp(-1j * evals * dt)
        step_op = (evecs * phases[:, None, :]) @ evecs.conj().transpose(0, 2, 1)
        u = step_op @ u
        if n in rec:
            out[:, rec[n]] = u
    drift = np.abs(u.conj().transpose(0, 2, 1) @ u - np.eye(d)).max()
    if drift > 1e-8:
        raise UnitarityError(f"unitarity drift {drift:.2e} exceeds 1e-8")
    return out


def evolve_trajectory(
    spec: Spectrum, model: NoiseModel, cfg: TrajectoryConfig, rng: np.random.Generator
) -> np.ndarray:
    """One full trajectory: U(t_n) for n = 0..n_steps, shape (n+1, D, D)."""
    validate_step(model, cfg.dt)
    steps = np.arange(cfg.n_steps + 1)
    return _evolve_recorded(spec.energies, model, cfg.dt, steps, [rng])[0]


def _grid_steps(t_grid: np.ndarray, dt: float) -> np.ndarray:
    steps = np.round(np.asarray(t_grid, dtype=float) / dt).astype(int)
    if not np.allclose(steps * dt, t_grid, atol=1e-9):
        raise ValueError("t_grid times must be integer multiples of dt")
    return steps


def _estimate_values(
    spec: Spectrum,
    model: NoiseModel,
    cfg: TrajectoryConfig,
    t_grid: np.ndarray,
    value_fn,
    threads: int = 1,
) -> np.ndarray:
    """Per-trajectory observable values, shape (n_traj, n_times).

    value_fn maps recorded unitaries (batch, n_times, D, D) to values
    (batch, n_times).  Chunked over trajectories; each chunk writes its own
    slots, so results do not depend on scheduling.
    """
    validate_step(model, cfg.dt)
    steps = _grid_steps(t_grid, cfg.dt)
    if steps.max() > cfg.n_steps:
        raise ValueError("t_grid extends beyond cfg.t_max")
    gens = trajectory_generators(cfg.seed, cfg.n_traj)
    d = spec.dim
    n_steps = max(int(steps.max()), 1)
    chunk = max(1, min(cfg.n_traj, int(64e6 / (n_steps * d * d * 16))))
    values = np.empty((cfg.n_traj, steps.size), dtype=complex)

    def run_chunk(lo: int, hi: int) -> None:
        u_rec = _evolve_recorded(spec.energies, model, cfg.dt, steps, gens[lo:hi])
        values[lo:hi] = value_fn(u_rec)

    bounds = [(lo, min(lo + chunk, cfg.n_traj)) for lo in range(0, cfg.n_traj, chunk)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: run_chunk(*b), bounds))
    else:
        for lo, hi in bounds:
            run_chunk(lo, hi)
    return values


def _reduce(name, spec, model, cfg, t_grid, values, real=True) -> DiagnosticSeries:
    mean = values.mean(axis=0)
    if cfg.n_traj >= 2:
        stderr = values.std(axis=0, ddof=1) / np.sqrt(cfg.n_traj)
        stderr = np.abs(stderr)
    else:
        stderr = np.zeros(mean.size)
    if real:
        mean = mean.real
    meta = _meta(
        spec,
        noise=model.to_config(),
        dt=cfg.dt,
        n_traj=cfg.n_traj,
        seed=cfg.seed,
    )
    return DiagnosticSeries(name, np.asarray(t_grid, dtype=float), mean, stderr, meta)


def estimate_sff(
    spec: Spectrum, model: NoiseModel, cfg: TrajectoryConfig, t_grid, threads: int = 1
) -> DiagnosticSeries:
    """Monte Carlo estimate of K_J(t) = E|TrU|^2 / D^2 with error bars."""
    d = spec.dim

    def value_fn(u_rec):
        tr = np.trace(u_rec, axis1=-2, axis2=-1)
        return (np.abs(tr) ** 2 / d**2).astype(complex)

    values = _estimate_values(spec, model, cfg, np.asarray(t_grid), value_fn, threads)
    return _reduce("mc_sff", spec, model, cfg, t_grid, values)


def estimate_sff_squared(
    spec: Spectrum, model: NoiseModel, cfg: TrajectoryConfig, t_grid, threads: int = 1
) -> DiagnosticSeries:
    """Monte Carlo estimate of E[(TrU TrU+)^2]."""

    def value_fn(u_rec):
        tr = np.trace(u_rec, axis1=-2, axis2=-1)
        return (np.abs(tr) ** 4).astype(complex)

    values = _estimate_values(spec, model, cfg, np.asarray(t_grid), value_fn, threads)
    return _reduce("mc_sff_squared", spec, model, cfg, t_grid, values)


def estimate_two_point(
    spec: Spectrum,
    model: NoiseModel,
    cfg: TrajectoryConfig,
    O: np.ndarray,
    t_grid,
    threads: int = 1,
) -> DiagnosticSeries:
    """Monte Carlo estimate of C_J(t) = (1/D) E[Tr(O+ U+ O U)]."""
    d = spec.dim
    o_dag = O.conj().T

    def value_fn(u_rec):
        o_t = u_rec.conj().transpose(0, 1, 3, 2) @ O @ u_rec
        return np.trace(o_dag @ o_t, axis1=-2, axis2=-1) / d

    values = _estimate_values(spec, model, cfg, np.asarray(t_grid), value_fn, threads)
    return _reduce("mc_two_point", spec, model, cfg, t_grid, values, real=False)


def estimate_otoc(
    spec: Spectrum,
    model: NoiseModel,
    cfg: TrajectoryConfig,
    A: np.ndarray,
    B: np.ndarray,
    t_grid,
    threads: int = 1,
) -> DiagnosticSeries:
    """Monte Carlo estimate of OTOC_J = (1/D) E[Tr(A B_t A B_t)]."""
    d = spec.dim

    def value_fn(u_rec):
        b_t = u_rec.conj().transpose(0, 1, 3, 2) @ B @ u_rec
        ab = A @ b_t
        return np.trace(ab @ ab, axis1=-2, axis2=-1) / d

    values = _estimate_values(spec, model, cfg, np.asarray(t_grid), value_fn, threads)
    return _reduce("mc_otoc", spec, model, cfg, t_grid, values, real=False)


def estimate_transfer(
    spec: Spectrum,
    model: NoiseModel,
    cfg: TrajectoryConfig,
    i: int,
    j: int,
    t_grid,
    threads: int = 1,
) -> DiagnosticSeries:
    """Monte Carlo estimate of the transfer probability E|U_ji|^2."""

    def value_fn(u_rec):
        return (np.abs(u_rec[:, :, j, i]) ** 2).astype(complex)

    values = _estimate_values(spec, model, cfg, np.asarray(t_grid), value_fn, threads)
    return _reduce("mc_transfer", spec, model, cfg, t_grid, values)
