import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwuopt.errors import (
    EmptySupportRowError,
    InputError,
    NegativeEntryError,
    NonFiniteError,
    RowSumViolationError,
)
from mwuopt.simplex import (
    DomainShape,
    StrategyProfile,
    random_profile,
    random_profiles,
    snap,
    support,
    validate,
)


class TestDomainShape:
    def test_sizes(self):
        s = DomainShape(3, 4)
        assert (s.n, s.m, s.size) == (3, 4, 12)
        assert s.flat_index(2, 1) == 9
        assert s.player_of().tolist() == [0] * 4 + [1] * 4 + [2] * 4

    @pytest.mark.parametrize("n,m", [(0, 2), (1, 1), (2, 0)])
    def test_rejects_degenerate(self, n, m):
        with pytest.raises(InputError):
            DomainShape(n, m)

    def test_vertices(self):
        verts = list(DomainShape(2, 3).vertices())
        assert len(verts) == 9
        for v in verts:
            assert np.array_equal(v.sum(axis=1), np.ones(2))
            assert set(v.reshape(-1)) == {0.0, 1.0}


class TestValidate:
    def test_uniform(self):
        x = validate([[0.5, 0.5]], tol=1e-9)
        assert x.values.tolist() == [[0.5, 0.5]]

    def test_row_sum_violation(self):
        with pytest.raises(RowSumViolationError):
            validate([[0.7, 0.4]], tol=1e-9)

    def test_vertex_row(self):
        x = validate([[0.3, 0.7], [1.0, 0.0]])
        assert x.values[1].tolist() == [1.0, 0.0]

    def test_negative_entry(self):
        with pytest.raises(NegativeEntryError):
            validate([[1.1, -0.1]])

    def test_tiny_negative_is_clamped(self):
        x = validate([[1.0 + 1e-13, -1e-13]])
        assert x.values.min() == 0.0
        assert abs(x.values.sum() - 1.0) <= 1e-15

    def test_non_finite(self):
        with pytest.raises(NonFiniteError):
            validate([[np.nan, 1.0]])

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            validate([[0.5, 0.5]], shape=(2, 2))

    def test_renormalises_near_one(self):
        x = validate([[0.5 + 4e-13, 0.5]])
        assert abs(x.values.sum() - 1.0) <= 1e-15

    def test_profile_is_read_only(self):
        x = validate([[0.5, 0.5]])
        with pytest.raises(ValueError):
            x.values[0, 0] = 1.0


class TestSerialisation:
    def test_round_trip(self):
        x = random_profile((2, 3), seed=4)
        data = json.loads(json.dumps(x.to_dict()))
        assert set(data) == {"n", "m", "values"}
        assert StrategyProfile.from_dict(data) == x

    def test_missing_key(self):
        with pytest.raises(InputError):
            StrategyProfile.from_dict({"n": 1, "values": [[1.0, 0.0]]})


class TestRandomProfile:
    def test_interior_point(self):
        x = random_profile((1, 2), seed=0)
        a = x.values[0, 0]
        assert 0.0 < a < 1.0
        assert x.values[0, 1] == pytest.approx(1.0 - a, abs=1e-15)

    def test_deterministic(self):
        assert random_profile((3, 3), seed=12) == random_profile((3, 3), seed=12)
        assert random_profile((3, 3), seed=12) != random_profile((3, 3), seed=13)

    def test_dirichlet_mean(self):
        draws = np.array([p.values[0] for p in random_profiles((1, 3), 10_000, seed=1)])
        assert np.all(np.abs(draws.mean(axis=0) - 1.0 / 3.0) <= 0.02)

    @given(n=st.integers(1, 4), m=st.integers(2, 5), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_outputs_validate(self, n, m, seed):
        x = random_profile((n, m), seed)
        again = validate(x.values, x.shape, tol=1e-12)
        assert np.max(np.abs(again.values - x.values)) <= 1e-15


class TestSupport:
    def test_vertex(self):
        assert support(validate([[1.0, 0.0]]), 1e-9).in_support.tolist() == [[True, False]]

    def test_uniform(self):
        assert support(validate([[0.5, 0.5]]), 1e-9).in_support.tolist() == [[True, True]]

    def test_below_threshold(self):
        x = StrategyProfile((1, 2), [[1e-12, 1 - 1e-12]])
        assert support(x, 1e-9).in_support.tolist() == [[False, True]]

    def test_empty_row(self):
        x = StrategyProfile((1, 2), [[0.5, 0.5]])
        with pytest.raises(EmptySupportRowError):
            support(x, 0.6)

    def test_negative_tolerance(self):
        with pytest.raises(InputError):
            support(validate([[0.5, 0.5]]), -1.0)

    @given(
        rows=st.lists(
            st.lists(st.floats(0, 1) | st.sampled_from([0.0, 1e-12, 1e-10]), min_size=3, max_size=3),
            min_size=1,
            max_size=3,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_idempotent_under_clamping(self, rows):
        arr = np.array(rows) + np.array([0.0, 0.0, 0.5])
        x = validate(arr / arr.sum(axis=1, keepdims=True), tol=1e-9)
        supp = support(x, 1e-9)
        clamped = snap(x, 1e-9)
        assert support(clamped, 1e-9) == supp
