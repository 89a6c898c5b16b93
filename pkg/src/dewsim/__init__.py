"""Exact single-pass simulation of many FIFO level-1 cache configurations."""
from .config import (TABLE1_SWEEP, CacheConfig, ForestPlan, SweepSpec, enumerate_configs,
                     parse_sweep, plan_forests, read_sweep_file)
from .engine import EngineOptions, process_access, simulate
from .errors import (AddressRangeError, ConfigError, DewError, ResourceError, ShadowCheckError,
                     TraceParseError, UsageError)
from .estimator import DEWSimulator, OracleSimulator, check_trace
from .forest import EMPTY, SimulationForest, new_forest
from .oracle import OracleStats, cross_check, oracle_simulate, oracle_sweep, simulate_set_associative
from .report import InstrumentationRow, ResultRow, emit_instrumentation, emit_results
from .trace_io import (AccessKind, MemoryAccess, TraceSpec, block_address, generate_addresses, generate_trace,
                       parse_trace, read_trace, write_trace)

__version__ = "0.1.0"
