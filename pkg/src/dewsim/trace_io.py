"""Trace parsing, block addressing and synthetic trace generation.

Two text formats are understood:

* ``din``: ``<label> <hex-address>`` per line, label 0=read, 1=write, 2=ifetch.
* ``raw_hex``: one hexadecimal address per line, every record is a read.

Blank lines and lines starting with ``#`` are skipped in both.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import AddressRangeError, ConfigError, TraceParseError

# int64 storage with -1 reserved as the empty sentinel downstream.
MAX_ADDRESS_BITS = 63
MAX_ADDRESS = (1 << MAX_ADDRESS_BITS) - 1

FORMATS = ("din", "raw_hex")


class AccessKind(enum.IntEnum):
    READ = 0
    WRITE = 1
    IFETCH = 2


@dataclass(frozen=True, slots=True)
class MemoryAccess:
    address: int
    kind: AccessKind = AccessKind.READ


@dataclass(frozen=True)
class TraceSpec:
    """Parameters of a synthetic loop/random trace."""

    length: int
    address_bits: int = 16
    loop_fraction: float = 0.5
    loop_body: int = 64
    stride: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ConfigError(f"length must be >= 0, got {self.length}")
        if not 0.0 <= self.loop_fraction <= 1.0:
            raise ConfigError(f"loop_fraction must be in [0, 1], got {self.loop_fraction}")
        if not 1 <= self.address_bits <= MAX_ADDRESS_BITS:
            raise ConfigError(f"address_bits must be in [1, {MAX_ADDRESS_BITS}], got {self.address_bits}")
        if self.loop_body < 1:
            raise ConfigError(f"loop_body must be >= 1, got {self.loop_body}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if self.loop_fraction > 0 and self.loop_body * self.stride > (1 << self.address_bits):
            raise ConfigError("loop_body * stride does not fit in the address space")


def _parse_hex(text: str, lineno: int, line: str) -> int:
    try:
        value = int(text, 16)
    except ValueError:
        raise TraceParseError(lineno, line, "bad hexadecimal address") from None
    if value < 0:
        raise TraceParseError(lineno, line, "negative address")
    if value > MAX_ADDRESS:
        raise AddressRangeError(lineno, line, f"address wider than {MAX_ADDRESS_BITS} bits")
    return value


def parse_trace(source: Iterable[str], format: str = "din") -> Iterator[MemoryAccess]:
    """Yield accesses from ``source`` (a text stream or any iterable of lines) in file order."""
    if format not in FORMATS:
        raise ConfigError(f"unknown trace format {format!r}; expected one of {FORMATS}")
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if format == "raw_hex":
            if len(line.split()) != 1:
                raise TraceParseError(lineno, line, "expected a single address")
            yield MemoryAccess(_parse_hex(line, lineno, line), AccessKind.READ)
            continue
        fields = line.split()
        if len(fields) != 2:
            raise TraceParseError(lineno, line, "expected '<label> <address>'")
        label, addr = fields
        if label not in ("0", "1", "2"):
            raise TraceParseError(lineno, line, f"label {label!r} not in {{0,1,2}}")
        yield MemoryAccess(_parse_hex(addr, lineno, line), AccessKind(int(label)))


def read_trace(path, format: str = "din") -> list[MemoryAccess]:
    with open(path, encoding="ascii") as fh:
        return list(parse_trace(fh, format))


def write_trace(accesses: Iterable[MemoryAccess], dest: IO[str], format: str = "din") -> None:
    if format not in FORMATS:
        raise ConfigError(f"unknown trace format {format!r}")
    for acc in accesses:
        if format == "din":
            dest.write(f"{int(acc.kind)} {acc.address:x}\n")
        else:
            dest.write(f"0x{acc.address:x}\n")


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def block_address(address: int, block_size: int) -> int:
    if not is_power_of_two(block_size):
        raise ConfigError(f"block size must be a power of two, got {block_size}")
    return address >> (int(block_size).bit_length() - 1)


def to_address_array(trace) -> np.ndarray:
    """Coerce a trace (MemoryAccess objects, plain integers or an array) to int64 addresses."""
    if isinstance(trace, np.ndarray):
        if trace.ndim != 1:
            raise ConfigError(f"trace must be one-dimensional, got shape {trace.shape}")
        if trace.size == 0:
            return np.zeros(0, dtype=np.int64)
        if trace.dtype.kind not in "iu":
            raise ConfigError(f"trace addresses must be integers, got dtype {trace.dtype}")
        if trace.dtype.kind == "u" and int(trace.max()) > MAX_ADDRESS:
            raise AddressRangeError(0, str(trace.max()), f"address wider than {MAX_ADDRESS_BITS} bits")
        arr = trace.astype(np.int64, copy=False)
    else:
        addrs = [a.address if isinstance(a, MemoryAccess) else int(a) for a in trace]
        if addrs and max(addrs) > MAX_ADDRESS:
            raise AddressRangeError(0, str(max(addrs)), f"address wider than {MAX_ADDRESS_BITS} bits")
        arr = np.array(addrs, dtype=np.int64) if addrs else np.zeros(0, dtype=np.int64)
    if arr.size and arr.min() < 0:
        raise ConfigError("trace addresses must be non-negative")
    return arr


def block_addresses(addresses: np.ndarray, block_size: int) -> np.ndarray:
    if not is_power_of_two(block_size):
        raise ConfigError(f"block size must be a power of two, got {block_size}")
    return addresses >> (int(block_size).bit_length() - 1)


def generate_addresses(spec: TraceSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(addresses, kinds)`` arrays for ``spec``.

    Each access is independently a loop access with probability ``loop_fraction``.
    Loop accesses walk ``base + k * stride`` for ``k = 0 .. loop_body-1`` cyclically;
    the rest are uniform over ``[0, 2**address_bits)``.
    """
    rng = np.random.default_rng(spec.seed)
    space = 1 << spec.address_bits
    span = spec.loop_body * spec.stride
    base = int(rng.integers(0, space - span + 1)) if spec.loop_fraction > 0 else 0
    is_loop = rng.random(spec.length) < spec.loop_fraction
    uniform = rng.integers(0, space, size=spec.length, dtype=np.int64)
    rw = rng.integers(0, 2, size=spec.length, dtype=np.int8)

    loop_pos = np.cumsum(is_loop) - 1
    loop_addr = base + (loop_pos % spec.loop_body) * spec.stride
    addresses = np.where(is_loop, loop_addr, uniform).astype(np.int64)
    kinds = np.where(is_loop, np.int8(AccessKind.IFETCH), rw).astype(np.int8)
    return addresses, kinds


def generate_trace(spec: TraceSpec) -> list[MemoryAccess]:
    addresses, kinds = generate_addresses(spec)
    return [MemoryAccess(int(a), AccessKind(int(k))) for a, k in zip(addresses, kinds)]
