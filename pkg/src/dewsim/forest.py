"""Array-backed binomial simulation tree for one (block size, associativity) pair.

Level ``l`` holds the ``2**l`` sets of the cache with ``2**l`` sets; set ``i`` at
level ``l`` is the parent of sets ``i`` and ``i + 2**l`` at level ``l + 1``.
All levels live in flat arrays, node ``(l, i)`` at row ``2**l - 1 + i``.

Tags are full block addresses. ``EMPTY`` (-1) marks an unused tag or wave slot.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import ForestPlan
from .errors import ResourceError

EMPTY = -1

# 2**22 - 1 nodes; the 525-config sweep needs 2**15 - 1
DEFAULT_MAX_NODES = (1 << 22) - 1

# instrumentation counter slots
UNOPTIMIZED_EVALS, NODE_EVALS, MRA_COUNT, SEARCHES, WAVE_COUNT, MRE_COUNT, TAG_COMPARISONS, ACCESSES = range(8)
INSTRUMENTATION_FIELDS = ("unoptimized_evals", "node_evals", "mra_count", "searches",
                          "wave_count", "mre_count", "tag_comparisons")


@dataclass(frozen=True)
class WayEntry:
    tag: int = EMPTY
    wave: int = EMPTY


@dataclass(frozen=True)
class TreeNode:
    """Snapshot of one set; mutations go through the engine, not this view."""

    mra: int
    mre: WayEntry
    ways: tuple[WayEntry, ...]
    fifo_cursor: int

    def resident(self, tag: int) -> bool:
        return tag != EMPTY and any(w.tag == tag for w in self.ways)


@dataclass(frozen=True)
class LevelStats:
    sets: int
    accesses: int
    misses_assoc: int
    misses_dm: int

    @property
    def hits_assoc(self) -> int:
        return self.accesses - self.misses_assoc

    @property
    def hits_dm(self) -> int:
        return self.accesses - self.misses_dm


def node_row(level: int, index: int) -> int:
    return (1 << level) - 1 + index


def set_index(level: int, block_addr: int) -> int:
    """Set of ``block_addr`` in the cache with ``2**level`` sets."""
    return block_addr & ((1 << level) - 1)


def child_index(level: int, block_addr: int) -> int:
    """Index at ``level + 1`` of the child on ``block_addr``'s path."""
    idx = set_index(level, block_addr)
    return idx + (1 << level) if (block_addr >> level) & 1 else idx


class SimulationForest:
    """All levels of one (B, A) tree plus miss and instrumentation counters.

    Single-writer: drive one forest from one thread at a time.
    """

    def __init__(self, plan: ForestPlan, max_nodes: int = DEFAULT_MAX_NODES):
        self.plan = plan
        self.assoc = plan.assoc
        self.n_levels = plan.n_tree_levels
        n_nodes = (1 << self.n_levels) - 1
        if n_nodes > max_nodes:
            raise ResourceError(
                f"forest for up to {plan.levels[-1]} sets needs {n_nodes} nodes "
                f"(about {n_nodes * (24 + 12 * self.assoc) / 2**20:.1f} MiB); budget is {max_nodes}")
        self.n_nodes = n_nodes
        self.mra = np.full(n_nodes, EMPTY, dtype=np.int64)
        self.mre_tag = np.full(n_nodes, EMPTY, dtype=np.int64)
        self.mre_wave = np.full(n_nodes, EMPTY, dtype=np.int32)
        self.way_tag = np.full((n_nodes, self.assoc), EMPTY, dtype=np.int64)
        self.way_wave = np.full((n_nodes, self.assoc), EMPTY, dtype=np.int32)
        self.cursor = np.zeros(n_nodes, dtype=np.int32)
        self.misses_assoc = np.zeros(self.n_levels, dtype=np.int64)
        self.misses_dm = np.zeros(self.n_levels, dtype=np.int64)
        self.counters = np.zeros(8, dtype=np.int64)

    @property
    def accesses(self) -> int:
        return int(self.counters[ACCESSES])

    def node(self, level: int, index: int) -> TreeNode:
        if not 0 <= level < self.n_levels or not 0 <= index < (1 << level):
            raise IndexError(f"no node ({level}, {index}) in a {self.n_levels}-level forest")
        r = node_row(level, index)
        return TreeNode(
            mra=int(self.mra[r]),
            mre=WayEntry(int(self.mre_tag[r]), int(self.mre_wave[r])),
            ways=tuple(WayEntry(int(t), int(w)) for t, w in zip(self.way_tag[r], self.way_wave[r])),
            fifo_cursor=int(self.cursor[r]),
        )

    def level_stats(self, level: int) -> LevelStats:
        return LevelStats(1 << level, self.accesses, int(self.misses_assoc[level]), int(self.misses_dm[level]))

    def instrumentation(self) -> dict[str, int]:
        return {name: int(self.counters[i]) for i, name in enumerate(INSTRUMENTATION_FIELDS)}

    def miss_counts(self) -> dict[tuple[int, int, int], int]:
        """Misses keyed by ``(block, assoc, sets)`` for every planned level, A-way and direct-mapped."""
        out = {}
        b, a = self.plan.block, self.assoc
        for s in self.plan.levels:
            level = s.bit_length() - 1
            out[(b, a, s)] = int(self.misses_assoc[level])
            if self.plan.include_direct_mapped:
                out[(b, 1, s)] = int(self.misses_dm[level])
        return out

    def touched_nodes(self) -> list[tuple[int, int]]:
        rows = np.flatnonzero(self.mra != EMPTY)
        out = []
        for r in rows:
            level = int(r + 1).bit_length() - 1
            out.append((level, int(r) - (1 << level) + 1))
        return out

    def __repr__(self) -> str:
        return (f"SimulationForest(block={self.plan.block}, assoc={self.assoc}, "
                f"levels={self.n_levels}, accesses={self.accesses})")


def new_forest(plan: ForestPlan, max_nodes: int = DEFAULT_MAX_NODES) -> SimulationForest:
    return SimulationForest(plan, max_nodes=max_nodes)


def fifo_victim(forest: SimulationForest, level: int, index: int) -> int:
    """Way holding the least recently inserted tag (or the next empty way while filling)."""
    return int(forest.cursor[node_row(level, index)])


def check_node_invariants(forest: SimulationForest, level: int, index: int) -> Optional[str]:
    """Return a description of the first violated node invariant, or None."""
    node = forest.node(level, index)
    tags = [w.tag for w in node.ways if w.tag != EMPTY]
    if len(tags) != len(set(tags)):
        return f"duplicate tags in node ({level}, {index}): {tags}"
    if node.mra != EMPTY and node.mra not in tags:
        return f"MRA tag {node.mra:#x} not resident in node ({level}, {index})"
    if node.mre.tag != EMPTY and node.mre.tag in tags:
        return f"MRE tag {node.mre.tag:#x} resident in node ({level}, {index})"
    if level + 1 < forest.n_levels:
        for entry in (*node.ways, node.mre):
            if entry.tag == EMPTY or entry.wave == EMPTY:
                continue
            child = forest.node(level + 1, child_index(level, entry.tag))
            at_wave = child.ways[entry.wave].tag == entry.tag
            if at_wave != child.resident(entry.tag):
                return (f"wave pointer of {entry.tag:#x} in node ({level}, {index}) points at way "
                        f"{entry.wave} but residency in the child is {child.resident(entry.tag)}")
    return None
