"""Estimator-style wrappers so simulations compose with scikit-learn tooling.

``fit`` consumes a trace (``MemoryAccess`` objects or integer byte addresses);
results are read back from fitted attributes and helper methods.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .config import TABLE1_SWEEP, CacheConfig, SweepSpec, plan_forests
from .engine import EngineOptions, simulate
from .errors import ConfigError
from .forest import DEFAULT_MAX_NODES, SimulationForest
from .oracle import OracleStats, _check_policy, oracle_simulate_blocks
from .report import InstrumentationRow, ResultRow
from .trace_io import MemoryAccess, block_addresses, to_address_array


def check_trace(X) -> np.ndarray:
    """Validate a trace and return it as a 1-D int64 array of byte addresses."""
    if isinstance(X, np.ndarray) and X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if isinstance(X, np.ndarray):
        X = check_array(X, ensure_2d=False, dtype=None, ensure_min_samples=0)
        return to_address_array(X)
    return to_address_array(X)


class DEWSimulator(BaseEstimator):
    """Single-pass FIFO simulation of every configuration in a power-of-two sweep.

    Parameters
    ----------
    sweep : SweepSpec, default=None
        Configurations to simulate; None means the 525-configuration sweep
        (sets 2^0..2^14, blocks 2^0..2^6, assocs 2^0..2^4).
    use_mra, use_wave, use_mre : bool
        Toggle the individual shortcuts. Results never depend on these, only work does.
    shadow_check : bool
        Revalidate every shortcut and node invariant on every access (slow).
    record_stops : bool
        Keep, per forest, the level at which each access stopped on an MRA match.
    n_jobs : int, default=None
        Threads driving independent forests; None or 1 runs them sequentially.
    max_nodes : int
        Per-forest node budget.
    """

    def __init__(self, sweep: Optional[SweepSpec] = None, use_mra=True, use_wave=True, use_mre=True,
                 shadow_check=False, record_stops=False, n_jobs=None, max_nodes=DEFAULT_MAX_NODES):
        self.sweep = sweep
        self.use_mra = use_mra
        self.use_wave = use_wave
        self.use_mre = use_mre
        self.shadow_check = shadow_check
        self.record_stops = record_stops
        self.n_jobs = n_jobs
        self.max_nodes = max_nodes

    def _options(self) -> EngineOptions:
        return EngineOptions(bool(self.use_mra), bool(self.use_wave), bool(self.use_mre), bool(self.shadow_check))

    def _init_forests(self):
        sweep = self.sweep if self.sweep is not None else TABLE1_SWEEP
        if not isinstance(sweep, SweepSpec):
            raise ConfigError(f"sweep must be a SweepSpec, got {sweep!r}")
        self.sweep_ = sweep
        self.plans_ = plan_forests(sweep)
        self.forests_ = [SimulationForest(p, max_nodes=self.max_nodes) for p in self.plans_]
        self.stop_levels_ = [[] for _ in self.plans_] if self.record_stops else None
        self.n_accesses_ = 0

    def fit(self, X, y=None):
        self._init_forests()
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        """Continue the simulation with more of the trace."""
        if not hasattr(self, "forests_"):
            self._init_forests()
        addresses = check_trace(X)
        blocks = {b: block_addresses(addresses, b) for b in {p.block for p in self.plans_}}
        options = self._options()

        def run(i):
            forest = self.forests_[i]
            return simulate(forest, blocks[forest.plan.block], options, record_stops=self.record_stops)

        jobs = 1 if self.n_jobs is None else int(self.n_jobs)
        if jobs == -1:
            jobs = len(self.forests_)
        if jobs > 1 and len(self.forests_) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                stops = list(pool.map(run, range(len(self.forests_))))
        else:
            stops = [run(i) for i in range(len(self.forests_))]
        if self.record_stops:
            for acc, s in zip(self.stop_levels_, stops):
                acc.append(s)
        self.n_accesses_ += int(addresses.shape[0])
        return self

    def stop_levels(self) -> list[np.ndarray]:
        check_is_fitted(self, "forests_")
        if not self.record_stops:
            raise ConfigError("construct with record_stops=True to keep MRA stop levels")
        return [np.concatenate(s) if s else np.zeros(0, dtype=np.int8) for s in self.stop_levels_]

    def miss_counts(self) -> dict[CacheConfig, int]:
        """Misses per configuration of the sweep, each reported by exactly one forest."""
        check_is_fitted(self, "forests_")
        out = {}
        for forest in self.forests_:
            plan = forest.plan
            for cfg in plan.configs():
                level = cfg.sets.bit_length() - 1
                counts = forest.misses_assoc if cfg.assoc == plan.assoc else forest.misses_dm
                out[cfg] = int(counts[level])
        return out

    def direct_mapped_by_forest(self) -> dict[tuple[int, int], dict[int, int]]:
        """A=1 misses per set size as computed by each (block, assoc) forest."""
        check_is_fitted(self, "forests_")
        out = {}
        for forest in self.forests_:
            plan = forest.plan
            counts = forest.misses_dm if plan.include_direct_mapped else forest.misses_assoc
            out[(plan.block, plan.assoc)] = {s: int(counts[s.bit_length() - 1]) for s in plan.levels}
        return out

    def results(self) -> list[ResultRow]:
        n = self.n_accesses_
        return sorted((ResultRow.from_counts(c.block, c.assoc, c.sets, n, m)
                       for c, m in self.miss_counts().items()),
                      key=lambda r: (r.block_bytes, r.assoc, r.sets))

    def instrumentation(self) -> list[InstrumentationRow]:
        check_is_fitted(self, "forests_")
        return [InstrumentationRow(f.plan.block, f.plan.assoc, **f.instrumentation()) for f in self.forests_]

    def total_tag_comparisons(self) -> int:
        return sum(r.tag_comparisons for r in self.instrumentation())


class OracleSimulator(BaseEstimator):
    """Brute-force simulation of one configuration (FIFO or LRU)."""

    def __init__(self, sets=1, assoc=1, block=4, policy="FIFO", record_hits=False):
        self.sets = sets
        self.assoc = assoc
        self.block = block
        self.policy = policy
        self.record_hits = record_hits

    def fit(self, X, y=None):
        config = CacheConfig(self.block, self.assoc, self.sets)
        policy = _check_policy(self.policy)
        blocks = block_addresses(check_trace(X), config.block)
        if self.record_hits:
            self.stats_, self.hits_ = oracle_simulate_blocks(config, blocks, policy, return_hits=True)
        else:
            self.stats_ = oracle_simulate_blocks(config, blocks, policy)
        return self

    @property
    def config_(self) -> CacheConfig:
        check_is_fitted(self, "stats_")
        return self.stats_.config


__all__ = ["DEWSimulator", "OracleSimulator", "OracleStats", "MemoryAccess", "check_trace"]
