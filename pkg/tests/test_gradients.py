import numpy as np
import pytest

from dfshift.gradcheck import MICRO_CONFIGS, compare, micro_config, random_problem, run_gradcheck
from dfshift.model import backward_batch, forward_batch, param_count
from dfshift.model.network import ParamStore


@pytest.mark.parametrize("name", sorted(MICRO_CONFIGS))
def test_micro_gradcheck_passes(name):
    results = run_gradcheck(MICRO_CONFIGS[name](), seed=0)
    bad = [(r.name, r.max_rel_err) for r in results if not r.passed]
    assert not bad, bad
    assert len(results) == len(ParamStore.layout(MICRO_CONFIGS[name]()))


def test_micro_dual_config_has_both_bands_everywhere():
    cfg = micro_config()
    assert [cfg.site_bands(s) for s in (1, 2, 3, 4)] == [(1, 1)] * 4
    assert [s.shared for s in cfg.stages] == [False, True, True, False, False]
    assert cfg.shift.sites == (1, 2, 3, 4)


def test_skip_adjoint_mutation_is_caught():
    results = {r.name: r for r in run_gradcheck(micro_config(), seed=0, skip_shift_adjoint=True)}
    assert not results["stage1.weight.m0"].passed
    assert not results["stage2.weight"].passed
    # nothing upstream of the last shift site is affected
    assert results["fc.weight"].passed and results["stage5.weight.m0"].passed


def test_tiny_tolerance_fails():
    results = run_gradcheck(MICRO_CONFIGS["nonshift+nonshared"](), seed=1, tol=1e-12)
    assert not all(r.passed for r in results)


def test_compare_floor_handles_zero_blocks():
    z = ParamStore({"w": np.zeros(3)})
    (r,) = compare(z, z, tol=1e-4)
    assert r.passed and r.max_rel_err == 0.0


def test_backward_deterministic():
    cfg = micro_config()
    params, x, y = random_problem(cfg, 3)
    g = []
    for _ in range(2):
        _, tape = forward_batch(x, cfg, params)
        g.append(backward_batch(tape, y, cfg, params))
    for name, a in g[0].items():
        assert a.tobytes() == g[1][name].tobytes()
    assert param_count(cfg) == params.total_size()
