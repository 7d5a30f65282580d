"""Monte-Carlo runs of the ring dynamics with per-step flow measurements.

Replica ``r`` of a run with seed ``s`` draws its initial configuration from
``numpy.random.default_rng([s, r])``, so results do not depend on how many
workers evaluate the replicas or in which order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import Configuration, RingSimulator, init_bernoulli, init_fixed_count
from .measure import FlowSample, flow_sample

INIT_MODES = ("bernoulli", "fixed")


def initial_configuration(L: int, seed, init: str = "bernoulli", rho: float | None = None,
                          N: int | None = None) -> Configuration:
    """Bernoulli(``rho``) sites, or exactly ``N`` cars (``N`` defaults to ``round(rho * L)``)."""
    if init == "bernoulli":
        if rho is None:
            if N is None:
                raise ValueError("bernoulli init needs rho (or N)")
            rho = N / L
        return init_bernoulli(L, float(rho), seed)
    if init == "fixed":
        if N is None:
            if rho is None:
                raise ValueError("fixed-count init needs N or rho")
            N = round(float(rho) * L)
        return init_fixed_count(L, N, seed)
    raise ValueError(f"unknown init mode {init!r}; expected one of {INIT_MODES}")


def run_series(config: Configuration, m: int, t_max: int) -> list[FlowSample]:
    """Measurements at ``t = 0, 1, ..., t_max``."""
    sim = RingSimulator(config, m)
    out = [flow_sample(0, sim.gaps(), sim.L, m)]
    for t in range(1, t_max + 1):
        sim.advance()
        out.append(flow_sample(t, sim.gaps(), sim.L, m))
    return out


def _replica(args) -> tuple[int, np.ndarray]:
    m, L, t_max, seed, r, init, rho, N = args
    config = initial_configuration(L, [seed, r], init, rho, N)
    series = run_series(config, m, t_max)
    arr = np.array([(s.mean_velocity, s.flow, s.block_prob) for s in series])
    return config.n_cars, arr


@dataclass
class ReplicaRun:
    """Per-replica series stacked as ``data[replica, t, quantity]``.

    Quantities, in order: mean velocity, flow, block probability.
    """

    m: int
    L: int
    seed: int
    n_cars: np.ndarray
    data: np.ndarray

    @property
    def replicas(self) -> int:
        return self.data.shape[0]

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.data.shape[1])

    @property
    def densities(self) -> np.ndarray:
        return self.n_cars / self.L

    def mean(self) -> np.ndarray:
        return self.data.mean(axis=0)

    def stderr(self) -> np.ndarray:
        """Standard error of the replica mean; zero for a single replica."""
        R = self.replicas
        if R < 2:
            return np.zeros(self.data.shape[1:])
        return self.data.std(axis=0, ddof=1) / np.sqrt(R)


def run_replicas(m: int, L: int, t_max: int, seed: int, replicas: int = 1, init: str = "bernoulli",
                 rho: float | None = None, N: int | None = None, workers: int = 1) -> ReplicaRun:
    jobs = [(m, L, t_max, seed, r, init, rho, N) for r in range(replicas)]
    if workers > 1 and replicas > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replica, jobs))
    else:
        results = [_replica(j) for j in jobs]
    n_cars = np.array([n for n, _ in results])
    data = np.stack([a for _, a in results])
    return ReplicaRun(m, L, seed, n_cars, data)
