"""Time integrators: explicit Euler, two-stage TVD RK, and the theta scheme.

The limiter enters as a coefficient-array postprocessor so the 1D and 2D
limiters plug into the same driver; for the TVD RK scheme it is applied to
both the intermediate stage and the final update.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .operators import OperatorSet

Limiter = Callable[[np.ndarray], np.ndarray]


@dataclass
class SchemeConfig:
    kind: str                      # 'explicit_euler' | 'tvd_rk2' | 'theta'
    dt: float
    theta: float = 0.5
    apply_limiter: bool = False
    limiter: Limiter | None = None

    def __post_init__(self):
        if self.kind not in ("explicit_euler", "tvd_rk2", "theta"):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (0.0 <= self.theta <= 1.0):
            raise ValueError("theta must lie in [0, 1]")
        if self.apply_limiter and self.limiter is None:
            raise ValueError("apply_limiter set but no limiter given")


def _postprocess(coeffs: np.ndarray, config: SchemeConfig) -> np.ndarray:
    if config.apply_limiter:
        return config.limiter(coeffs)
    return coeffs


def step(coeffs: np.ndarray, ops: OperatorSet, config: SchemeConfig,
         t: float = 0.0) -> np.ndarray:
    """Advance the coefficient array by one step of the configured scheme."""
    shape = coeffs.shape
    y = coeffs.reshape(-1)
    dt = config.dt
    if y.size != ops.n_dofs:
        raise ValueError("state and operators have incompatible sizes")

    if config.kind == "explicit_euler":
        y1 = y + dt * ops.rhs(y, t)
        return _postprocess(y1.reshape(shape), config)

    if config.kind == "tvd_rk2":
        y1 = y + dt * ops.rhs(y, t)
        y1 = _postprocess(y1.reshape(shape), config).reshape(-1)
        y2 = 0.5 * y + 0.5 * y1 + 0.5 * dt * ops.rhs(y1, t + dt)
        return _postprocess(y2.reshape(shape), config)

    # theta scheme: (M + dt*theta*K) y^{n+1} = (M - dt*(1-theta)*K) y^n - dt*b
    th = config.theta
    K = (ops.upwind + ops.stab).to_dense()
    M = ops.mass.to_dense()
    B = M + dt * th * K
    C = M - dt * (1.0 - th) * K
    b = th * ops.boundary_at(t + dt) + (1.0 - th) * ops.boundary_at(t)
    try:
        ynew = scipy.linalg.solve(B, C @ y - dt * b)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError("singular implicit system") from exc
    return _postprocess(ynew.reshape(shape), config)


@dataclass
class RunRecord:
    """Observer time series, one row per recorded step (step 0 included)."""
    names: tuple[str, ...]
    steps: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    values: dict[str, list[float]] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.names:
            self.values.setdefault(name, [])

    def append(self, n: int, t: float, vals: dict[str, float]) -> None:
        self.steps.append(n)
        self.times.append(t)
        for name in self.names:
            self.values[name].append(vals[name])

    def series(self, name: str) -> np.ndarray:
        return np.asarray(self.values[name])

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "time", *self.names])
            for i, (n, t) in enumerate(zip(self.steps, self.times)):
                w.writerow([n, repr(float(t)),
                            *(repr(float(self.values[k][i]))
                              for k in self.names)])


def run(coeffs: np.ndarray, ops: OperatorSet, config: SchemeConfig,
        n_steps: int, observers=None, t0: float = 0.0
        ) -> tuple[np.ndarray, RunRecord]:
    """Repeatedly apply `step`, evaluating observers after every step.

    observers is either a dict name -> callable(coeffs) or one callable
    returning a dict (cheaper when diagnostics share work), or None.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    if observers is None:
        evaluate = lambda y: {}
    elif callable(observers):
        evaluate = observers
    else:
        items = tuple(observers.items())
        evaluate = lambda y: {k: f(y) for k, f in items}
    y = np.array(coeffs, dtype=float)
    t = t0
    first = evaluate(y)
    record = RunRecord(tuple(first))
    record.append(0, t, first)
    for n in range(1, n_steps + 1):
        y = step(y, ops, config, t)
        t = t0 + n * config.dt
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state at step {n}")
        record.append(n, t, evaluate(y))
    return y, record
