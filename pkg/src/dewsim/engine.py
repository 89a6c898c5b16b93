"""Top-down traversal of a simulation forest for one block address at a time.

Per level the decisions run cheapest first:

1. MRA: the set's most recently accessed tag. A match is a hit here and in every
   larger set on the same path, so the descent stops.
2. Wave pointer: the parent's entry for this tag remembers which way of this set
   the tag was placed in. FIFO never moves a resident block, so one comparison
   at that way decides hit or miss.
3. MRE: the most recently evicted tag is known not to be resident.
4. Linear search of the ways.

The same jitted kernels back both the per-operation API (used for inspection and
unit tests) and the batch path :func:`simulate`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import ShadowCheckError
from .forest import (
    ACCESSES, EMPTY, MRA_COUNT, MRE_COUNT, NODE_EVALS, SEARCHES, TAG_COMPARISONS,
    UNOPTIMIZED_EVALS, WAVE_COUNT, SimulationForest, check_node_invariants, node_row,
)


# No kernel here allocates, so NRT is off: with it on, every helper call pays
# atomic refcount traffic on each array argument (roughly 20x slower overall).
_kernel = njit(cache=True, nogil=True, _nrt=False)


class Result(enum.Enum):
    HIT = "hit"
    MISS = "miss"


class Via(enum.IntEnum):
    MRA = 0
    WAVE = 1
    MRE = 2
    SEARCH = 3
    SEARCH_FAIL = 4


# shadow-check failure codes returned by the kernels
_OK, _BAD_SHORTCUT, _BAD_MRA_STOP, _BAD_NODE, _BAD_WAVE = range(5)
_ERROR_TEXT = {
    _BAD_SHORTCUT: "wave/MRE short-circuit disagrees with a full search",
    _BAD_MRA_STOP: "MRA stop but a deeper set does not hold the tag as its MRA",
    _BAD_NODE: "node invariant violated (duplicate tag, MRA not resident or MRE resident)",
    _BAD_WAVE: "wave pointer not decisive in the child set",
}


@dataclass(frozen=True)
class EngineOptions:
    use_mra: bool = True
    use_wave: bool = True
    use_mre: bool = True
    shadow_check: bool = False


@dataclass(frozen=True)
class ParentLink:
    level: int
    index: int
    entry_index: int


@dataclass(frozen=True)
class LookupOutcome:
    result: Result
    way: Optional[int]
    via: Via


@_kernel
def _search(way_tag, row, tag):
    for w in range(way_tag.shape[1]):
        t = way_tag[row, w]
        if t == EMPTY:
            break
        if t == tag:
            return w
    return -1


@_kernel
def _lookup(way_tag, mre_tag, row, tag, hint, use_mre, counters):
    # returns (hit, way, via); way is -1 on a miss
    if hint != EMPTY:
        counters[WAVE_COUNT] += 1
        counters[TAG_COMPARISONS] += 1
        if way_tag[row, hint] == tag:
            return True, hint, 1
        return False, -1, 1
    if use_mre:
        m = mre_tag[row]
        if m != EMPTY:
            counters[TAG_COMPARISONS] += 1
            if m == tag:
                counters[MRE_COUNT] += 1
                return False, -1, 2
    counters[SEARCHES] += 1
    for w in range(way_tag.shape[1]):
        t = way_tag[row, w]
        if t == EMPTY:
            break
        counters[TAG_COMPARISONS] += 1
        if t == tag:
            return True, w, 3
    return False, -1, 4


@_kernel
def _handle_hit(way_wave, way, parent_row, parent_entry):
    if parent_row >= 0:
        way_wave[parent_row, parent_entry] = way
    return way


@_kernel
def _handle_miss(way_tag, way_wave, mre_tag, mre_wave, cursor, misses_assoc, counters,
                 level, row, tag, parent_row, parent_entry, use_mre, mre_known):
    # mre_known: 1 = lookup found tag == MRE, 0 = lookup ruled it out, -1 = not checked
    misses_assoc[level] += 1
    n = cursor[row]
    victim_tag = way_tag[row, n]
    victim_wave = way_wave[row, n]
    if use_mre:
        is_mre = mre_known == 1
        if mre_known == -1:
            m = mre_tag[row]
            if m != EMPTY:
                counters[TAG_COMPARISONS] += 1
                is_mre = m == tag
        if is_mre:
            way_tag[row, n] = tag
            way_wave[row, n] = mre_wave[row]
            mre_tag[row] = victim_tag
            mre_wave[row] = victim_wave
        else:
            way_tag[row, n] = tag
            way_wave[row, n] = EMPTY
            if victim_tag != EMPTY:
                mre_tag[row] = victim_tag
                mre_wave[row] = victim_wave
    else:
        way_tag[row, n] = tag
        way_wave[row, n] = EMPTY
    cursor[row] = (n + 1) % way_tag.shape[1]
    if parent_row >= 0:
        way_wave[parent_row, parent_entry] = n
    return n


@_kernel
def _check_path(tag, depth, mra, mre_tag, mre_wave, way_tag, way_wave, n_levels):
    # node invariants and wave decisiveness for the nodes on tag's path down to depth
    a = way_tag.shape[1]
    for l in range(depth + 1):
        row = (1 << l) - 1 + (tag & ((1 << l) - 1))
        for i in range(a):
            ti = way_tag[row, i]
            if ti == EMPTY:
                continue
            for j in range(i + 1, a):
                if way_tag[row, j] == ti:
                    return _BAD_NODE, l
        if mra[row] != EMPTY and _search(way_tag, row, mra[row]) < 0:
            return _BAD_NODE, l
        if mre_tag[row] != EMPTY and _search(way_tag, row, mre_tag[row]) >= 0:
            return _BAD_NODE, l
        if l + 1 >= n_levels:
            continue
        for i in range(a + 1):
            if i < a:
                t = way_tag[row, i]
                w = way_wave[row, i]
            else:
                t = mre_tag[row]
                w = mre_wave[row]
            if t == EMPTY or w == EMPTY:
                continue
            crow = (1 << (l + 1)) - 1 + (t & ((1 << (l + 1)) - 1))
            if (way_tag[crow, w] == t) != (_search(way_tag, crow, t) >= 0):
                return _BAD_WAVE, l
    return _OK, -1


@_kernel
def _process(tag, mra, mre_tag, mre_wave, way_tag, way_wave, cursor, misses_assoc, misses_dm,
             counters, n_levels, use_mra, use_wave, use_mre, shadow):
    # returns (stop_level, error_code, error_level)
    counters[ACCESSES] += 1
    counters[UNOPTIMIZED_EVALS] += n_levels
    parent_row = -1
    parent_entry = -1
    hint = EMPTY
    stop = -1
    deepest = n_levels - 1
    for level in range(n_levels):
        row = (1 << level) - 1 + (tag & ((1 << level) - 1))
        counters[NODE_EVALS] += 1
        m = mra[row]
        if m != EMPTY:
            counters[TAG_COMPARISONS] += 1
        if m == tag:
            if use_mra:
                counters[MRA_COUNT] += 1
                stop = level
                deepest = level
                if shadow:
                    for deeper in range(level + 1, n_levels):
                        drow = (1 << deeper) - 1 + (tag & ((1 << deeper) - 1))
                        if mra[drow] != tag or _search(way_tag, drow, tag) < 0:
                            return stop, _BAD_MRA_STOP, deeper
                break
        else:
            misses_dm[level] += 1

        hit, way, via = _lookup(way_tag, mre_tag, row, tag, hint if use_wave else EMPTY,
                                use_mre, counters)
        if shadow:
            if via == 1 or via == 2:
                found = _search(way_tag, row, tag)
                if (found >= 0) != hit or (hit and found != way):
                    return stop, _BAD_SHORTCUT, level
        if hit:
            n = _handle_hit(way_wave, way, parent_row, parent_entry)
        else:
            mre_known = -1
            if via == 2:
                mre_known = 1
            elif via == 4:
                if use_mre:
                    mre_known = 0
            n = _handle_miss(way_tag, way_wave, mre_tag, mre_wave, cursor, misses_assoc, counters,
                             level, row, tag, parent_row, parent_entry, use_mre, mre_known)
        mra[row] = tag
        hint = way_wave[row, n]
        parent_row = row
        parent_entry = n
    if shadow:
        code, bad_level = _check_path(tag, deepest, mra, mre_tag, mre_wave, way_tag, way_wave, n_levels)
        if code != _OK:
            return stop, code, bad_level
    return stop, _OK, -1


@_kernel
def _run(blocks, mra, mre_tag, mre_wave, way_tag, way_wave, cursor, misses_assoc, misses_dm,
         counters, n_levels, use_mra, use_wave, use_mre, shadow, stops):
    record = stops.shape[0] > 0
    for i in range(blocks.shape[0]):
        stop, code, bad_level = _process(blocks[i], mra, mre_tag, mre_wave, way_tag, way_wave, cursor,
                                         misses_assoc, misses_dm, counters, n_levels,
                                         use_mra, use_wave, use_mre, shadow)
        if record:
            stops[i] = stop
        if code != _OK:
            return code, i, bad_level
    return _OK, -1, -1


def _raise_shadow(forest: SimulationForest, code: int, index: int, level: int, tag: int) -> None:
    path = []
    for l in range(forest.n_levels):
        idx = tag & ((1 << l) - 1)
        path.append(f"  level {l} set {idx}: {forest.node(l, idx)}")
    detail = check_node_invariants(forest, level, tag & ((1 << level) - 1)) if level >= 0 else None
    raise ShadowCheckError(
        f"{_ERROR_TEXT[code]} at access {index} (block {tag:#x}), level {level}"
        + (f": {detail}" if detail else "") + "\nstate along the path:\n" + "\n".join(path))


def simulate(forest: SimulationForest, blocks: np.ndarray, options: EngineOptions = EngineOptions(),
             record_stops: bool = False) -> Optional[np.ndarray]:
    """Feed block addresses through ``forest`` in order.

    With ``record_stops`` the level of the MRA stop for every access is returned
    (-1 where the access descended to the deepest level).
    """
    blocks = np.ascontiguousarray(blocks, dtype=np.int64)
    stops = np.full(blocks.shape[0] if record_stops else 0, -1, dtype=np.int8)
    code, index, level = _run(blocks, forest.mra, forest.mre_tag, forest.mre_wave, forest.way_tag,
                              forest.way_wave, forest.cursor, forest.misses_assoc, forest.misses_dm,
                              forest.counters, forest.n_levels, options.use_mra, options.use_wave,
                              options.use_mre, options.shadow_check, stops)
    if code != _OK:
        _raise_shadow(forest, code, index, level, int(blocks[index]))
    return stops if record_stops else None


def process_access(forest: SimulationForest, block_addr: int,
                   options: EngineOptions = EngineOptions()) -> Optional[int]:
    """Process one block address; returns the MRA stop level, or None if no stop occurred."""
    stop, code, level = _process(block_addr, forest.mra, forest.mre_tag, forest.mre_wave, forest.way_tag,
                                 forest.way_wave, forest.cursor, forest.misses_assoc, forest.misses_dm,
                                 forest.counters, forest.n_levels, options.use_mra, options.use_wave,
                                 options.use_mre, options.shadow_check)
    if code != _OK:
        _raise_shadow(forest, code, forest.accesses - 1, level, block_addr)
    return None if stop < 0 else int(stop)


def lookup(forest: SimulationForest, level: int, index: int, tag: int,
           wave_hint: Optional[int] = None, use_mre: bool = True) -> LookupOutcome:
    hint = EMPTY if wave_hint is None else wave_hint
    hit, way, via = _lookup(forest.way_tag, forest.mre_tag, node_row(level, index), tag, hint,
                            use_mre, forest.counters)
    return LookupOutcome(Result.HIT if hit else Result.MISS, way if hit else None, Via(via))


def _parent_args(parent: Optional[ParentLink]) -> tuple[int, int]:
    if parent is None:
        return -1, -1
    return node_row(parent.level, parent.index), parent.entry_index


def handle_hit(forest: SimulationForest, level: int, index: int, way: int,
               parent: Optional[ParentLink] = None) -> int:
    """Record a hit at ``way``: the parent's matching entry now points here. Way contents are untouched."""
    row = node_row(level, index)
    tag = int(forest.way_tag[row, way])
    n = int(_handle_hit(forest.way_wave, way, *_parent_args(parent)))
    forest.mra[row] = tag
    return n


def handle_miss(forest: SimulationForest, level: int, index: int, tag: int,
                parent: Optional[ParentLink] = None, use_mre: bool = True) -> int:
    """Insert ``tag`` at the FIFO victim, swapping with the MRE entry when it holds ``tag``."""
    row = node_row(level, index)
    n = int(_handle_miss(forest.way_tag, forest.way_wave, forest.mre_tag, forest.mre_wave, forest.cursor,
                         forest.misses_assoc, forest.counters, level, row, tag, *_parent_args(parent),
                         use_mre, -1))
    forest.mra[row] = tag
    return n
