import pytest
from hypothesis import given, strategies as st

from dewsim.config import (TABLE1_SWEEP, CacheConfig, ForestPlan, SweepSpec, enumerate_configs,
                           parse_power_list, parse_sweep, plan_forests, read_sweep_file)
from dewsim.errors import ConfigError


def test_table1_has_525_configurations():
    assert len(enumerate_configs(TABLE1_SWEEP)) == 15 * 7 * 5 == 525


def test_singleton_sweep():
    assert enumerate_configs(SweepSpec.from_ranges((0, 0), (0, 0), (0, 0))) == [CacheConfig(1, 1, 1)]


def test_small_cross_product_order():
    configs = enumerate_configs(SweepSpec.from_ranges((0, 1), (2, 2), (0, 1)))
    assert [(c.block, c.assoc, c.sets) for c in configs] == [(4, 1, 1), (4, 1, 2), (4, 2, 1), (4, 2, 2)]


def test_total_is_product():
    c = CacheConfig(block=16, assoc=4, sets=8)
    assert c.total == 512


@pytest.mark.parametrize("kw", [dict(block=3, assoc=1, sets=1), dict(block=4, assoc=0, sets=1),
                                dict(block=4, assoc=1, sets=6)])
def test_cache_config_rejects_non_powers(kw):
    with pytest.raises(ConfigError):
        CacheConfig(**kw)


ranges = st.tuples(st.integers(0, 5), st.integers(0, 3)).map(lambda t: (t[0], t[0] + t[1]))


@given(ranges, ranges, ranges)
def test_count_is_product_of_range_sizes(s, b, a):
    sweep = SweepSpec.from_ranges(s, b, a)
    n = (s[1] - s[0] + 1) * (b[1] - b[0] + 1) * (a[1] - a[0] + 1)
    assert len(enumerate_configs(sweep)) == n == sweep.n_configs


@given(ranges, ranges, st.sets(st.integers(0, 4), min_size=1))
def test_plans_cover_every_config_exactly_once(s, b, assoc_exps):
    sweep = SweepSpec(tuple(range(s[0], s[1] + 1)), tuple(range(b[0], b[1] + 1)), tuple(assoc_exps))
    reported = [c for plan in plan_forests(sweep) for c in plan.configs()]
    assert len(reported) == len(set(reported))
    assert set(reported) == set(enumerate_configs(sweep))


def test_three_block_sizes_one_assoc():
    sweep = SweepSpec(tuple(range(15)), (2, 4, 6), (2,))
    plans = plan_forests(sweep)
    assert [(p.block, p.assoc, len(p.levels)) for p in plans] == [(4, 4, 15), (16, 4, 15), (64, 4, 15)]
    assert all(p.include_direct_mapped for p in plans)


def test_table1_plans():
    plans = plan_forests(TABLE1_SWEEP)
    assert len(plans) == 28
    dm_reporters = [(p.block, p.assoc) for p in plans if p.reports_direct_mapped]
    assert dm_reporters == [(1 << b, 2) for b in range(7)]
    assert sum(len(p.configs()) for p in plans) == 525


def test_direct_mapped_only_sweep():
    (plan,) = plan_forests(SweepSpec((0, 1, 2), (2,), (0,)))
    assert plan.assoc == 1 and not plan.include_direct_mapped
    assert [c.assoc for c in plan.configs()] == [1, 1, 1]


def test_plan_levels_must_double():
    with pytest.raises(ConfigError):
        ForestPlan(4, 2, (1, 4), True)
    with pytest.raises(ConfigError):
        ForestPlan(4, 2, (1, 2), False)


def test_set_exponents_must_be_contiguous():
    with pytest.raises(ConfigError):
        SweepSpec((0, 2), (0,), (0,))


def test_parse_power_lists():
    assert parse_power_list("2^0..2^3", "sets") == (0, 1, 2, 3)
    assert parse_power_list("4,16,64", "blocks") == (2, 4, 6)
    assert parse_power_list("1", "assocs") == (0,)
    with pytest.raises(ConfigError, match="--blocks"):
        parse_power_list("3", "blocks")
    with pytest.raises(ConfigError):
        parse_power_list("2^3..2^1", "sets")


def test_sweep_file(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text("# table 1, reduced\nsets = 2^0..2^4\nblocks=4,16\nassocs=1,2,4\n")
    sweep = read_sweep_file(path)
    assert sweep == parse_sweep("2^0..2^4", "4,16", "1,2,4")
    assert sweep.n_configs == 5 * 2 * 3


def test_sweep_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sets=2^0..2^2\nwidth=3\n")
    with pytest.raises(ConfigError):
        read_sweep_file(bad)
    missing = tmp_path / "missing.cfg"
    missing.write_text("sets=2^0..2^2\n")
    with pytest.raises(ConfigError, match="missing"):
        read_sweep_file(missing)
