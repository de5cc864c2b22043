"""The fixture corpus does what its README says it does."""

import numpy as np
import pytest

from conftest import load_fixture
from nearlab.errors import NoSymmetricRestriction
from nearlab.nearinv import (
    check_nearly_invariant,
    check_seminvariant,
    factor_nearly_invariant,
)
from nearlab.symrestrict import build_restriction, regularity_check


def test_chain_gap():
    expect, sp = load_fixture("chain-gap")
    rep = check_nearly_invariant(sp)
    assert rep.is_nearly_invariant == expect["nearly_invariant"]
    assert abs(rep.witness(1j)) < 1e-12
    with pytest.raises(NoSymmetricRestriction):
        build_restriction(sp)


def test_origin_spike():
    expect, sp = load_fixture("origin-spike")
    T = build_restriction(sp)
    grid = [g if not isinstance(g, list) else complex(*g)
            for g in expect["regularity_grid"]]
    rep = regularity_check(T, grid=grid)
    assert rep["ok"] == expect["regularity_ok"]
    assert min(rep["sigma_min"]) < 1e-6


def test_cauchy_pair():
    expect, sp = load_fixture("cauchy-pair")
    assert check_nearly_invariant(sp).is_nearly_invariant
    _, _, th = factor_nearly_invariant(sp)
    want = np.array([complex(*z) for z in expect["theta_zeros"]])
    assert np.max(np.abs(np.sort_complex(th.zeros) - want)) < 1e-9
    assert check_seminvariant(sp) == expect["seminvariant"]
