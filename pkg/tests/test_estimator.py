import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import BELADY
from dewsim import DEWSimulator, OracleSimulator, SweepSpec, TraceSpec, generate_addresses
from dewsim.config import enumerate_configs
from dewsim.errors import ConfigError
from dewsim.oracle import cross_check, oracle_sweep
from dewsim.trace_io import MemoryAccess

SMALL = SweepSpec.from_ranges((0, 6), (0, 4), (0, 3))


@pytest.fixture(scope="module")
def addresses():
    return generate_addresses(TraceSpec(length=3000, loop_fraction=0.5, seed=11))[0]


def test_params_round_trip():
    sim = DEWSimulator(sweep=SMALL, use_wave=False, n_jobs=2)
    assert sim.get_params()["use_wave"] is False
    assert clone(sim).get_params()["sweep"] == SMALL


def test_fit_matches_oracle(addresses):
    sim = DEWSimulator(sweep=SMALL, shadow_check=True).fit(addresses)
    assert set(sim.miss_counts()) == set(enumerate_configs(SMALL))
    assert cross_check(sim.miss_counts(), oracle_sweep(enumerate_configs(SMALL), addresses)).passed
    assert len(sim.results()) == SMALL.n_configs
    assert sim.results()[0].accesses == 3000


def test_threads_give_identical_results(addresses):
    seq = DEWSimulator(sweep=SMALL).fit(addresses)
    par = DEWSimulator(sweep=SMALL, n_jobs=-1).fit(addresses)
    assert seq.miss_counts() == par.miss_counts()
    assert seq.instrumentation() == par.instrumentation()


def test_partial_fit_equals_fit(addresses):
    whole = DEWSimulator(sweep=SMALL).fit(addresses)
    parts = DEWSimulator(sweep=SMALL).partial_fit(addresses[:1234]).partial_fit(addresses[1234:])
    assert whole.miss_counts() == parts.miss_counts()
    assert parts.n_accesses_ == 3000


def test_accepts_accesses_and_column_vectors(addresses):
    a = DEWSimulator(sweep=SMALL).fit([MemoryAccess(int(x)) for x in addresses[:200]])
    b = DEWSimulator(sweep=SMALL).fit(addresses[:200].reshape(-1, 1))
    assert a.miss_counts() == b.miss_counts()


def test_empty_trace():
    sim = DEWSimulator(sweep=SMALL).fit([])
    assert all(m == 0 for m in sim.miss_counts().values())
    assert all(r.miss_rate == 0.0 for r in sim.results())


def test_not_fitted():
    with pytest.raises(NotFittedError):
        DEWSimulator().miss_counts()


def test_bad_sweep():
    with pytest.raises(ConfigError):
        DEWSimulator(sweep=(0, 1)).fit([1])


def test_stop_levels_require_flag(addresses):
    with pytest.raises(ConfigError):
        DEWSimulator(sweep=SMALL).fit(addresses).stop_levels()
    stops = DEWSimulator(sweep=SMALL, record_stops=True).fit(addresses[:10]).partial_fit(addresses[10:20])
    assert all(len(s) == 20 for s in stops.stop_levels())


def test_direct_mapped_by_forest_agrees(addresses):
    sim = DEWSimulator(sweep=SMALL).fit(addresses)
    by_forest = sim.direct_mapped_by_forest()
    for b in SMALL.block_sizes:
        views = [by_forest[(b, a)] for a in (2, 4, 8)]
        assert views[0] == views[1] == views[2]


def test_oracle_estimator():
    est = OracleSimulator(sets=1, assoc=4, block=1, record_hits=True).fit(BELADY)
    assert est.stats_.misses == 10 and est.hits_.sum() == 2
    assert est.config_.assoc == 4
    with pytest.raises(ConfigError):
        OracleSimulator(assoc=3).fit(BELADY)
    with pytest.raises(NotFittedError):
        OracleSimulator().config_
    with pytest.raises(ConfigError):
        OracleSimulator(policy="MRU").fit([1])
