"""Cache geometries, power-of-two sweeps and the forest plan covering a sweep."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import ConfigError
from .trace_io import is_power_of_two


@dataclass(frozen=True, order=True)
class CacheConfig:
    # field order gives the (B, A, S) sort used everywhere
    block: int
    assoc: int
    sets: int

    def __post_init__(self):
        for name in ("sets", "assoc", "block"):
            value = getattr(self, name)
            if not is_power_of_two(value):
                raise ConfigError(f"{name} must be a power of two >= 1, got {value!r}")

    @property
    def total(self) -> int:
        """Capacity in bytes, S * A * B."""
        return self.sets * self.assoc * self.block


def _exponents(values: Iterable[int], name: str) -> tuple[int, ...]:
    out = tuple(sorted(set(int(v) for v in values)))
    if not out:
        raise ConfigError(f"{name} range is empty")
    if out[0] < 0:
        raise ConfigError(f"{name} exponents must be non-negative")
    return out


@dataclass(frozen=True)
class SweepSpec:
    """Exponents (base 2) of the set counts, block sizes and associativities to sweep.

    Set exponents must be contiguous because they become the levels of one tree;
    block and associativity exponents may be any non-empty set.
    """

    set_exponents: tuple[int, ...]
    block_exponents: tuple[int, ...]
    assoc_exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "set_exponents", _exponents(self.set_exponents, "sets"))
        object.__setattr__(self, "block_exponents", _exponents(self.block_exponents, "blocks"))
        object.__setattr__(self, "assoc_exponents", _exponents(self.assoc_exponents, "assocs"))
        s = self.set_exponents
        if s != tuple(range(s[0], s[-1] + 1)):
            raise ConfigError(f"set sizes must be a contiguous power-of-two range, got exponents {s}")

    @classmethod
    def from_ranges(cls, sets: tuple[int, int], blocks: tuple[int, int], assocs: tuple[int, int]) -> "SweepSpec":
        """Build from inclusive ``(lo, hi)`` exponent ranges."""
        for name, (lo, hi) in (("sets", sets), ("blocks", blocks), ("assocs", assocs)):
            if lo > hi:
                raise ConfigError(f"{name} range [{lo}, {hi}] is empty")
        return cls(tuple(range(sets[0], sets[1] + 1)),
                   tuple(range(blocks[0], blocks[1] + 1)),
                   tuple(range(assocs[0], assocs[1] + 1)))

    @property
    def set_sizes(self) -> list[int]:
        return [1 << e for e in self.set_exponents]

    @property
    def block_sizes(self) -> list[int]:
        return [1 << e for e in self.block_exponents]

    @property
    def assocs(self) -> list[int]:
        return [1 << e for e in self.assoc_exponents]

    @property
    def max_sets(self) -> int:
        return 1 << self.set_exponents[-1]

    @property
    def n_configs(self) -> int:
        return len(self.set_exponents) * len(self.block_exponents) * len(self.assoc_exponents)


# The cache parameter ranges explored for the 525-configuration study.
TABLE1_SWEEP = SweepSpec.from_ranges(sets=(0, 14), blocks=(0, 6), assocs=(0, 4))


@dataclass(frozen=True)
class ForestPlan:
    block: int
    assoc: int
    levels: tuple[int, ...]
    include_direct_mapped: bool
    # whether this plan is the canonical reporter of the A=1 configurations for its block size
    reports_direct_mapped: bool = field(default=False)

    def __post_init__(self):
        if not self.levels:
            raise ConfigError("a forest needs at least one level")
        for a, b in zip(self.levels, self.levels[1:]):
            if b != 2 * a:
                raise ConfigError(f"levels must double, got {self.levels}")
        if self.assoc > 1 and not self.include_direct_mapped:
            raise ConfigError("forests with assoc > 1 always carry direct-mapped results")

    @property
    def top_exponent(self) -> int:
        return self.levels[-1].bit_length() - 1

    @property
    def n_tree_levels(self) -> int:
        """Levels actually simulated; the tree is always rooted at the one-set level."""
        return self.top_exponent + 1

    def configs(self) -> list[CacheConfig]:
        """Configurations this plan is responsible for reporting."""
        out = [CacheConfig(self.block, self.assoc, s) for s in self.levels]
        if self.reports_direct_mapped and self.assoc > 1:
            out += [CacheConfig(self.block, 1, s) for s in self.levels]
        return sorted(out)


def enumerate_configs(sweep: SweepSpec) -> list[CacheConfig]:
    return [CacheConfig(b, a, s)
            for b in sweep.block_sizes
            for a in sweep.assocs
            for s in sweep.set_sizes]


def plan_forests(sweep: SweepSpec) -> list[ForestPlan]:
    """One forest per (block, assoc > 1) pair; the smallest-assoc forest per block reports A=1."""
    levels = tuple(sweep.set_sizes)
    multi = [a for a in sweep.assocs if a > 1]
    want_dm = 1 in sweep.assocs
    plans = []
    for b in sweep.block_sizes:
        if not multi:
            plans.append(ForestPlan(b, 1, levels, include_direct_mapped=False, reports_direct_mapped=False))
            continue
        for a in multi:
            plans.append(ForestPlan(b, a, levels, include_direct_mapped=True,
                                    reports_direct_mapped=want_dm and a == multi[0]))
    return plans


_RANGE_RE = re.compile(r"^\s*2\^(\d+)\s*\.\.\s*2\^(\d+)\s*$")


def parse_power_list(text: str, name: str) -> tuple[int, ...]:
    """Parse ``"2^lo..2^hi"`` or a comma list of powers of two into exponents."""
    m = _RANGE_RE.match(text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise ConfigError(f"--{name}: empty range {text!r}")
        return tuple(range(lo, hi + 1))
    exps = []
    for part in text.split(","):
        part = part.strip()
        try:
            value = int(part, 0)
        except ValueError:
            raise ConfigError(f"--{name}: {part!r} is not an integer") from None
        if not is_power_of_two(value):
            raise ConfigError(f"--{name}: {value} is not a power of two")
        exps.append(value.bit_length() - 1)
    return tuple(exps)


def parse_sweep(sets: str, blocks: str, assocs: str) -> SweepSpec:
    return SweepSpec(parse_power_list(sets, "sets"),
                     parse_power_list(blocks, "blocks"),
                     parse_power_list(assocs, "assocs"))


def read_sweep_file(path) -> SweepSpec:
    """Read a ``key=value`` file with keys ``sets``, ``blocks`` and ``assocs``."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in ("sets", "blocks", "assocs"):
                raise ConfigError(f"{path}:{lineno}: expected sets=, blocks= or assocs=, got {line!r}")
            values[key] = value.strip()
    missing = {"sets", "blocks", "assocs"} - values.keys()
    if missing:
        raise ConfigError(f"{path}: missing keys {sorted(missing)}")
    return parse_sweep(values["sets"], values["blocks"], values["assocs"])
