"""Conjugate-gradient solve of the reduced inpainting system.

Known pixels are Dirichlet data and are eliminated: CG runs only on the
unknown pixels, where the system is ``-A|_U u_U = (A u_K)|_U``. That block is
symmetric positive definite as soon as one pixel is known, and its solution
is the solution of ``M u = C f`` because the known rows of ``M`` are
identity rows.
"""
from __future__ import annotations

import contextlib
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from . import _kernels
from .grid import InpaintingMask, SignalField
from .laplacian import LaplacianStencil
from .reduction import NumericalBreakdown, plain_dot, reproducible_dot

DEFAULT_EPSILON = 1e-8
DEFAULT_MAX_ITERATIONS = 100_000


class SingularSystemError(ValueError):
    """No known pixel: constants span the nullspace of the operator."""


def available_workers() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = DEFAULT_EPSILON
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    workers: int = field(default_factory=available_workers)
    deterministic_reductions: bool = True
    record_history: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SolveReport:
    iterations: int
    initial_residual_norm: float
    final_residual_norm: float
    converged: bool
    residual_history: list[float] | None = None
    # ||C f - M u||_2 recomputed from the returned field, when available
    true_residual_norm: float | None = None

    @property
    def relative_residual(self) -> float:
        if self.initial_residual_norm == 0.0:
            return 0.0
        return self.final_residual_norm / self.initial_residual_norm

    def to_dict(self) -> dict:
        d = {
            "iterations": self.iterations,
            "initial_residual_norm": self.initial_residual_norm,
            "final_residual_norm": self.final_residual_norm,
            "relative_residual": self.relative_residual,
            "converged": self.converged,
        }
        if self.true_residual_norm is not None:
            d["true_residual_norm"] = self.true_residual_norm
        return d


def effective_workers(requested: int) -> int:
    return max(1, min(requested, numba.config.NUMBA_NUM_THREADS))


@contextlib.contextmanager
def worker_pool(requested: int):
    """Run numba kernels on ``requested`` threads (capped by the pool size)."""
    previous = numba.get_num_threads()
    numba.set_num_threads(effective_workers(requested))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


def cg_solve(apply: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
             cfg: SolverConfig = SolverConfig()) -> tuple[np.ndarray, SolveReport]:
    """Plain CG from the zero vector.

    Stops once ``||r_k|| <= epsilon * ||r_0||`` or after ``max_iterations``;
    the latter is reported through ``converged=False``, not raised.
    """
    b = np.ascontiguousarray(b, dtype=np.float64).reshape(-1)
    dot = reproducible_dot if cfg.deterministic_reductions else plain_dot
    history = [] if cfg.record_history else None

    with worker_pool(cfg.workers):
        x = np.zeros_like(b)
        r = b.copy()
        rr = dot(r, r)
        r0 = math.sqrt(rr)
        if history is not None:
            history.append(r0)
        if rr == 0.0:
            return x, SolveReport(0, 0.0, 0.0, True, history)
        target = cfg.epsilon * r0
        p = r.copy()
        it = 0
        rnorm = r0
        while rnorm > target and it < cfg.max_iterations:
            q = apply(p)
            pq = dot(p, q)
            if not pq > 0.0:
                raise NumericalBreakdown(f"curvature p.Ap = {pq} at iteration {it}")
            alpha = rr / pq
            if cfg.deterministic_reductions:
                rmax, bad = _kernels.update_solution(x, r, p, q, alpha)
                if bad:
                    raise NumericalBreakdown(f"non-finite residual at iteration {it}")
                rr_new = float(_kernels.folded_dot(r, r, rmax))
            else:
                x += alpha * p
                r -= alpha * q
                rr_new = dot(r, r)
            beta = rr_new / rr
            rr = rr_new
            rnorm = math.sqrt(rr)
            it += 1
            if history is not None:
                history.append(rnorm)
            if rnorm <= target:
                break
            if cfg.deterministic_reductions:
                _kernels.update_direction(p, r, beta)
            else:
                p *= beta
                p += r
    return x, SolveReport(it, r0, rnorm, rnorm <= target, history)


def reduced_operator(st: LaplacianStencil, mask: InpaintingMask) -> Callable[[np.ndarray], np.ndarray]:
    """-A restricted to unknown pixels, embedded in full-length vectors.

    Entries on known pixels are zero on input and output, so CG iterates
    stay in the unknown subspace.
    """
    known = mask.as_image()
    shape = st.grid.shape
    ith, iph = st.inv_h_theta_sq, st.inv_h_phi_sq

    def apply(p: np.ndarray) -> np.ndarray:
        out = np.empty(shape)
        _kernels.neg_laplacian_unknown(p.reshape(shape), known, ith, iph, out)
        return out.reshape(-1)

    return apply


def residual_image(st: LaplacianStencil, mask: InpaintingMask, u: np.ndarray) -> np.ndarray:
    """C f - M u for a field ``u`` that already equals f on known pixels."""
    out = np.empty(st.grid.shape)
    _kernels.laplacian_unknown(np.ascontiguousarray(u).reshape(st.grid.shape),
                               mask.as_image(), st.inv_h_theta_sq, st.inv_h_phi_sq, out)
    return out


def solve_reduced(st: LaplacianStencil, mask: InpaintingMask, f: SignalField,
                  cfg: SolverConfig = SolverConfig()) -> tuple[SignalField, SolveReport]:
    """Inpaint ``f`` from its known pixels.

    Known pixels are copied bitwise from ``f``. The unknowns are solved as
    offsets from the midrange of the known data; constants lie in the kernel
    of A, so this only changes the CG start point, and constant data
    finishes without iterating.
    """
    grid = st.grid
    grid.check_same(mask.grid)
    grid.check_same(f.grid)
    known = mask.known
    if not known.any():
        raise SingularSystemError("no known pixels; the inpainting system is singular")
    fk = f.values[known]
    if not np.all(np.isfinite(fk)):
        raise ValueError("known data must be finite")

    u = np.array(f.values)
    if known.all():
        return SignalField(grid, u), SolveReport(0, 0.0, 0.0, True, [0.0] if cfg.record_history else None, 0.0)

    lo, hi = float(fk.min()), float(fk.max())
    offset = 0.5 * (lo + hi) if hi - lo < math.inf else 0.5 * lo + 0.5 * hi
    v = np.zeros(grid.size)
    v[known] = fk - offset
    with worker_pool(cfg.workers):
        b = residual_image(st, mask, v).reshape(-1)
    x, report = cg_solve(reduced_operator(st, mask), b, cfg)

    unknown = ~known
    u[unknown] = offset + x[unknown]
    with worker_pool(cfg.workers):
        res = residual_image(st, mask, u).reshape(-1)
    report.true_residual_norm = math.sqrt(
        reproducible_dot(res, res) if cfg.deterministic_reductions else plain_dot(res, res))
    return SignalField(grid, u), report
