"""Brute-force single-configuration set-associative cache simulator.

This is the ground truth the forest engine is checked against, so it shares
nothing with it beyond trace handling: one configuration per run, every set a
plain array of resident blocks, linear scan on every access.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .config import CacheConfig
from .errors import ConfigError, UsageError
from .trace_io import block_addresses, to_address_array

POLICIES = ("FIFO", "LRU")


@dataclass(frozen=True)
class OracleStats:
    config: CacheConfig
    accesses: int
    hits: int
    misses: int
    tag_comparisons: int

    @property
    def miss_rate(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0


@njit(cache=True, nogil=True)
def _simulate(blocks, n_sets, n_ways, lru, hit_out):
    """Returns (hits, misses, comparisons); per-access hit flags go to ``hit_out`` when it is non-empty."""
    resident = np.zeros((n_sets, n_ways), dtype=np.int64)
    filled = np.zeros(n_sets, dtype=np.int64)
    next_victim = np.zeros(n_sets, dtype=np.int64)
    record = hit_out.shape[0] > 0
    hits = 0
    misses = 0
    comparisons = 0
    for i in range(blocks.shape[0]):
        b = blocks[i]
        s = b % n_sets
        k = filled[s]
        pos = -1
        for w in range(k):
            comparisons += 1
            if resident[s, w] == b:
                pos = w
                break
        if pos >= 0:
            hits += 1
            if lru:
                # keep ways ordered oldest-first; move the hit block to the end
                for w in range(pos, k - 1):
                    resident[s, w] = resident[s, w + 1]
                resident[s, k - 1] = b
        else:
            misses += 1
            if k < n_ways:
                resident[s, k] = b
                filled[s] = k + 1
            elif lru:
                for w in range(n_ways - 1):
                    resident[s, w] = resident[s, w + 1]
                resident[s, n_ways - 1] = b
            else:
                resident[s, next_victim[s]] = b
                next_victim[s] = (next_victim[s] + 1) % n_ways
        if record:
            hit_out[i] = pos >= 0
    return hits, misses, comparisons


def _check_policy(policy: str) -> str:
    policy = policy.upper()
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    return policy


def simulate_set_associative(blocks, sets: int, ways: int, policy: str = "FIFO", return_hits: bool = False):
    """Raw simulation without geometry validation (any positive way count).

    Returns ``(hits, misses, comparisons)``, plus per-access hit flags with ``return_hits``.
    """
    policy = _check_policy(policy)
    if sets < 1 or ways < 1:
        raise ConfigError(f"sets and ways must be positive, got {sets}, {ways}")
    blocks = np.ascontiguousarray(blocks, dtype=np.int64)
    hit_out = np.zeros(blocks.shape[0] if return_hits else 0, dtype=np.bool_)
    hits, misses, comparisons = _simulate(blocks, sets, ways, policy == "LRU", hit_out)
    counts = (int(hits), int(misses), int(comparisons))
    return (*counts, hit_out) if return_hits else counts


def oracle_simulate_blocks(config: CacheConfig, blocks: np.ndarray, policy: str = "FIFO",
                           return_hits: bool = False):
    """Simulate already block-divided addresses. Returns stats, or ``(stats, hit_flags)``."""
    out = simulate_set_associative(blocks, config.sets, config.assoc, policy, return_hits)
    stats = OracleStats(config, out[0] + out[1], *out[:3])
    return (stats, out[3]) if return_hits else stats


def oracle_simulate(config: CacheConfig, trace, policy: str = "FIFO") -> OracleStats:
    """Simulate ``trace`` (accesses or byte addresses) on one configuration."""
    if not isinstance(config, CacheConfig):
        raise ConfigError(f"expected a CacheConfig, got {config!r}")
    addresses = to_address_array(trace)
    return oracle_simulate_blocks(config, block_addresses(addresses, config.block), policy)


def oracle_sweep(configs, addresses: np.ndarray, policy: str = "FIFO") -> dict[CacheConfig, OracleStats]:
    """One independent oracle run per configuration over a shared trace."""
    addresses = to_address_array(addresses)
    by_block: dict[int, np.ndarray] = {}
    out = {}
    for cfg in configs:
        if cfg.block not in by_block:
            by_block[cfg.block] = block_addresses(addresses, cfg.block)
        out[cfg] = oracle_simulate_blocks(cfg, by_block[cfg.block], policy)
    return out


@dataclass
class CrossCheckReport:
    checked: int
    mismatches: list[tuple[CacheConfig, int, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def format(self) -> str:
        lines = [f"cross-check: {self.checked} configurations, {len(self.mismatches)} mismatches "
                 f"-> {'PASS' if self.passed else 'FAIL'}"]
        for cfg, dew, ref in self.mismatches:
            lines.append(f"  S={cfg.sets} A={cfg.assoc} B={cfg.block}: dew={dew} oracle={ref}")
        return "\n".join(lines)


def cross_check(dew_results: dict, oracle_results: dict) -> CrossCheckReport:
    """Compare per-configuration miss counts; keys are CacheConfig (or (B, A, S) tuples)."""
    dew = {_as_config(k): int(v) for k, v in dew_results.items()}
    ref = {_as_config(k): int(v.misses if isinstance(v, OracleStats) else v) for k, v in oracle_results.items()}
    if dew.keys() != ref.keys():
        only_dew = sorted(dew.keys() - ref.keys())
        only_ref = sorted(ref.keys() - dew.keys())
        raise UsageError(f"configuration sets differ; only in DEW results: {only_dew}; "
                         f"only in oracle results: {only_ref}")
    report = CrossCheckReport(checked=len(dew))
    for cfg in sorted(dew):
        if dew[cfg] != ref[cfg]:
            report.mismatches.append((cfg, dew[cfg], ref[cfg]))
    return report


def _as_config(key) -> CacheConfig:
    if isinstance(key, CacheConfig):
        return key
    block, assoc, sets = key
    return CacheConfig(block, assoc, sets)
