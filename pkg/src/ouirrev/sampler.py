"""Trajectory generation: exact one-step transition sampling, an
Euler-Maruyama reference integrator, and on-path accumulation of the heat
dissipation functional.

Reproducibility contract
------------------------
Every path owns a private counter-based RNG stream: numpy's Philox generator
keyed by (master seed, path index), with Gaussian variates drawn through
numpy's ziggurat sampler (``Generator.standard_normal``). A path is therefore
a pure function of (model, x0, dt, steps, master seed, path index) - bit for
bit, independent of how many paths run, in which order, or across how many
worker processes.

To keep that guarantee, the state recursion never enters a BLAS call whose
result could depend on batch shape: all matrix-vector products are expanded
column by column with a fixed accumulation order (n <= 32, so this is also
fast when vectorized across a batch of paths).

Heat increments use the Stratonovich midpoint rule,
dW = 2 (A^{-1} b(x_mid)) . dx with x_mid the chord midpoint, which is exact
in expectation for linear drift and exactly the increment of the quadratic
potential when one exists.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import LinearModel
from .stationary import StationaryLaw

# Path-chunk size cap: bounds peak memory of the vectorized recursion.
_CHUNK_ELEMENT_BUDGET = 5_000_000

# Stream index reserved for estimator bootstraps; never a path index.
BOOTSTRAP_STREAM = 2**64 - 1


def path_stream(seed: int, index: int) -> np.random.Generator:
    """Independent RNG stream for one path: Philox keyed by (seed, index)."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One sampled path: states x_k and cumulative heat W_k (W_0 = 0)."""

    dt: float
    states: np.ndarray  # (steps + 1, n)
    heat: np.ndarray  # (steps + 1,)
    seed: tuple[int, int] | None  # (master seed, path index) when stream-derived


@dataclass(frozen=True, eq=False)
class ExactStepper:
    """One-step law of the exact transition: x' | x ~ N(Phi x, Sigma_dt)."""

    dt: float
    Phi: np.ndarray
    Sigma_dt: np.ndarray
    chol: np.ndarray


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    """Ensemble of paths sharing (model, dt, master seed); path-major arrays."""

    dt: float
    seed: int
    states: np.ndarray  # (n_paths, steps + 1, n)
    heat: np.ndarray  # (n_paths, steps + 1)
    stationary_start: bool
    method: str

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    @property
    def n_steps(self) -> int:
        return self.states.shape[1] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    @property
    def t_final(self) -> float:
        return self.n_steps * self.dt

    def path(self, k: int) -> Trajectory:
        return Trajectory(
            dt=self.dt, states=self.states[k], heat=self.heat[k], seed=(self.seed, k)
        )


def _colmatvec(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """m @ x over the trailing axis of x, expanded with fixed accumulation
    order so results are identical for any leading (batch) shape."""
    n = m.shape[0]
    out = np.empty_like(x)
    for i in range(n):
        acc = m[i, 0] * x[..., 0]
        for j in range(1, n):
            acc += m[i, j] * x[..., j]
        out[..., i] = acc
    return out


def make_exact_stepper(model: LinearModel, dt: float) -> ExactStepper:
    """Precompute Phi = e^{-B dt} and Sigma_dt with its Cholesky factor."""
    dt = float(dt)
    if not math.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"dt must be finite and > 0, got {dt}")
    phi = linalg.expm(-model.B * dt)
    sigma = linalg.gram_integral(model.B, model.A, dt)
    chol = linalg.chol_spd(sigma)
    return ExactStepper(dt=dt, Phi=phi, Sigma_dt=sigma, chol=chol)


def _validate_run(model: LinearModel, x0, dt: float, steps: int) -> np.ndarray:
    xv = np.asarray(x0, dtype=float)
    if xv.shape[-1:] != (model.n,):
        raise ValueError(f"initial state must end in dimension {model.n}, got shape {xv.shape}")
    if not np.all(np.isfinite(xv)):
        raise ValueError("initial state contains non-finite entries")
    if not (isinstance(steps, (int, np.integer)) and steps >= 1):
        raise ValueError(f"steps must be a positive integer, got {steps}")
    dt = float(dt)
    if not math.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"dt must be finite and > 0, got {dt}")
    return xv


def _exact_states(phi: np.ndarray, noise: np.ndarray, x0: np.ndarray) -> np.ndarray:
    steps = noise.shape[0]
    states = np.empty((steps + 1,) + x0.shape)
    states[0] = x0
    x = np.array(x0, dtype=float, copy=True)
    for k in range(steps):
        x = _colmatvec(phi, x)
        x += noise[k]
        states[k + 1] = x
    return states


def _euler_states(bmat: np.ndarray, dt: float, noise: np.ndarray, x0: np.ndarray) -> np.ndarray:
    steps = noise.shape[0]
    states = np.empty((steps + 1,) + x0.shape)
    states[0] = x0
    x = np.array(x0, dtype=float, copy=True)
    for k in range(steps):
        x = x - dt * _colmatvec(bmat, x)
        x += noise[k]
        states[k + 1] = x
    return states


def _heat_series(s_mat: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Cumulative heat W_k from the midpoint rule; time along the first axis."""
    n = states.shape[-1]
    mid = 0.5 * (states[1:] + states[:-1])
    dx = states[1:] - states[:-1]
    v = _colmatvec(s_mat, mid)
    prod = v * dx
    dw = prod[..., 0].copy()
    for i in range(1, n):
        dw += prod[..., i]
    dw *= -2.0
    heat = np.empty(states.shape[:-1])
    heat[0] = 0.0
    np.cumsum(dw, axis=0, out=heat[1:])
    return heat


def sample_path(
    model: LinearModel,
    x0,
    dt: float,
    steps: int,
    rng: np.random.Generator,
    *,
    seed_record: tuple[int, int] | None = None,
) -> Trajectory:
    """Sample one path with the exact transition law.

    The stream is consumed as a single standard_normal((steps, n)) block;
    heat is accumulated with the Stratonovich midpoint rule.
    """
    xv = _validate_run(model, x0, dt, steps)
    stepper = make_exact_stepper(model, dt)
    z = rng.standard_normal((steps, model.n))
    noise = _colmatvec(stepper.chol, z)
    states = _exact_states(stepper.Phi, noise, xv)
    s_mat = np.linalg.solve(model.A, model.B)
    heat = _heat_series(s_mat, states)
    return Trajectory(dt=float(dt), states=states, heat=heat, seed=seed_record)


def euler_maruyama_path(
    model: LinearModel,
    x0,
    dt: float,
    steps: int,
    rng: np.random.Generator,
    *,
    seed_record: tuple[int, int] | None = None,
) -> Trajectory:
    """Reference Euler-Maruyama integrator x' = x - B x dt + Gamma sqrt(dt) z,
    exposing the discretization bias the exact sampler avoids."""
    xv = _validate_run(model, x0, dt, steps)
    z = rng.standard_normal((steps, model.n))
    noise = math.sqrt(float(dt)) * _colmatvec(model.Gamma, z)
    states = _euler_states(model.B, float(dt), noise, xv)
    s_mat = np.linalg.solve(model.A, model.B)
    heat = _heat_series(s_mat, states)
    return Trajectory(dt=float(dt), states=states, heat=heat, seed=seed_record)


def sample_stationary_start(law: StationaryLaw, rng: np.random.Generator) -> np.ndarray:
    """A draw from the stationary law N(0, Xi) via its Cholesky factor."""
    z = rng.standard_normal(law.model.n)
    return _colmatvec(law.chol_Xi, z)


def _generate_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    """Generate a contiguous range of paths; module-level for process pools.

    Per path p the stream is consumed exactly as the single-path API does:
    an optional standard_normal(n) block for a stationary start, then one
    standard_normal((steps, n)) block for the increments.
    """
    (seed, indices, steps, n, method, dt, phi, chol_step, bmat, gamma, s_mat, x0, chol_xi) = args
    count = len(indices)
    z = np.empty((steps, count, n))
    if chol_xi is not None:
        z0 = np.empty((count, n))
        for c, p in enumerate(indices):
            stream = path_stream(seed, p)
            z0[c] = stream.standard_normal(n)
            z[:, c, :] = stream.standard_normal((steps, n))
        starts = _colmatvec(chol_xi, z0)
    else:
        for c, p in enumerate(indices):
            z[:, c, :] = path_stream(seed, p).standard_normal((steps, n))
        starts = np.broadcast_to(x0, (count, n))
    if method == "exact":
        noise = _colmatvec(chol_step, z)
        states = _exact_states(phi, noise, starts)
    else:
        noise = math.sqrt(dt) * _colmatvec(gamma, z)
        states = _euler_states(bmat, dt, noise, starts)
    heat = _heat_series(s_mat, states)
    return states, heat


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit value, else OU_IRREV_THREADS, else 1 (serial)."""
    if workers is None:
        raw = os.environ.get("OU_IRREV_THREADS", "").strip()
        workers = int(raw) if raw else 0
    if workers < 0:
        raise ValueError(f"worker count must be >= 0, got {workers}")
    if workers == 0:
        return 1
    return workers


def sample_batch(
    model: LinearModel,
    dt: float,
    steps: int,
    n_paths: int,
    seed: int,
    *,
    x0=None,
    law: StationaryLaw | None = None,
    method: str = "exact",
    workers: int | None = None,
) -> TrajectoryBatch:
    """Sample an ensemble of paths with per-path streams derived from seed.

    Starts are either a shared point x0 or, when law is given, independent
    stationary draws. Results are byte-identical for any worker count.
    """
    if method not in ("exact", "euler"):
        raise ValueError(f"unknown method {method!r}")
    if not (isinstance(n_paths, (int, np.integer)) and n_paths >= 1):
        raise ValueError(f"n_paths must be a positive integer, got {n_paths}")
    if not (0 <= int(seed) < 2**64):
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    n = model.n
    if law is not None:
        start_vec = np.zeros(n)
        chol_xi = law.chol_Xi
    else:
        start_vec = np.asarray(np.zeros(n) if x0 is None else x0, dtype=float)
        chol_xi = None
    start_vec = _validate_run(model, start_vec, dt, steps)
    dt = float(dt)
    if method == "exact":
        stepper = make_exact_stepper(model, dt)
        phi, chol_step = stepper.Phi, stepper.chol
    else:
        phi = chol_step = None
    s_mat = np.linalg.solve(model.A, model.B)

    n_workers = resolve_workers(workers)
    chunk = max(1, _CHUNK_ELEMENT_BUDGET // ((steps + 1) * n))
    if n_workers > 1:
        chunk = min(chunk, max(1, math.ceil(n_paths / n_workers)))
    specs = [
        (
            int(seed),
            range(lo, min(lo + chunk, n_paths)),
            int(steps),
            n,
            method,
            dt,
            phi,
            chol_step,
            model.B,
            model.Gamma,
            s_mat,
            start_vec,
            chol_xi,
        )
        for lo in range(0, n_paths, chunk)
    ]
    if n_workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=min(n_workers, len(specs))) as pool:
            parts = list(pool.map(_generate_chunk, specs))
    else:
        parts = [_generate_chunk(spec) for spec in specs]
    states = np.concatenate([p[0] for p in parts], axis=1)
    heat = np.concatenate([p[1] for p in parts], axis=1)
    return TrajectoryBatch(
        dt=dt,
        seed=int(seed),
        states=np.ascontiguousarray(states.transpose(1, 0, 2)),
        heat=np.ascontiguousarray(heat.T),
        stationary_start=law is not None,
        method=method,
    )
