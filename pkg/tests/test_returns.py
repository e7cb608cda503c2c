import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kelly_delay.returns import (
    BinaryLattice,
    EmpiricalPMF,
    EnumerationCapError,
    ModelError,
    ReturnPath,
    attractiveness_threshold,
    dumps_model,
    enumerate_blocks,
    enumerate_paths,
    load_model,
    loads_model,
    sample_block,
    sample_path,
    save_model,
    stream_uniforms,
    sufficient_attractiveness_margin,
)

lattices = st.builds(
    BinaryLattice,
    x_max=st.floats(1e-3, 2.0),
    x_min=st.floats(-0.95, -1e-3),
    p=st.floats(0.0, 1.0),
)


class TestModels:
    @pytest.mark.parametrize("x_max,x_min,p", [(0.0, -0.1, 0.5), (0.1, 0.0, 0.5), (0.1, -1.0, 0.5),
                                                (0.1, -0.1, 1.2), (0.1, -0.1, -0.1), (np.inf, -0.1, 0.5)])
    def test_lattice_rejects_invalid(self, x_max, x_min, p):
        with pytest.raises(ModelError):
            BinaryLattice(x_max, x_min, p)

    def test_pmf_weights_exact(self):
        pmf = EmpiricalPMF.from_returns([0.01, 0.01, -0.02])
        assert dict(pmf.atoms) == {0.01: Fraction(2, 3), -0.02: Fraction(1, 3)}
        assert sum(w for _, w in pmf.atoms) == 1
        assert pmf.x_min == -0.02 and pmf.x_max == 0.01

    def test_pmf_rejects_bad_mass_and_values(self):
        with pytest.raises(ModelError):
            EmpiricalPMF(((0.1, Fraction(1, 2)), (-0.1, Fraction(1, 3))))
        with pytest.raises(ModelError):
            EmpiricalPMF(((-1.0, Fraction(1)),))
        with pytest.raises(ModelError):
            EmpiricalPMF.from_returns([])

    def test_model_file_round_trip(self, tmp_path):
        lat = BinaryLattice(0.02, -0.01, 0.6)
        save_model(lat, tmp_path / "lat.txt")
        assert load_model(tmp_path / "lat.txt") == lat
        pmf = EmpiricalPMF.from_returns([0.001, -0.002, 0.001, 0.0, 0.003, 0.001, 0.0])
        assert loads_model(dumps_model(pmf)) == pmf

    def test_loads_pmf_with_decimal_weights(self):
        pmf = loads_model("return,weight\n0.01,0.25\n-0.01,0.75\n")
        assert pmf.probs.tolist() == [0.75, 0.25]

    def test_lattice_file_missing_key(self):
        with pytest.raises(ModelError, match="x_min"):
            loads_model("x_max = 0.1\np = 0.5\n")


class TestAttractiveness:
    def test_reference_lattice_is_attractive(self):
        assert sufficient_attractiveness_margin(BinaryLattice(0.02, -0.01, 0.6)) <= 1

    def test_equality_case(self):
        assert sufficient_attractiveness_margin(BinaryLattice(1.0, -0.5, 2 / 3)) == pytest.approx(1.0, abs=1e-15)

    def test_losing_branch_only(self):
        assert sufficient_attractiveness_margin(BinaryLattice(0.02, -0.01, 0.0)) == pytest.approx(1 / 0.99)

    @pytest.mark.parametrize("x_max,x_min,expected", [(0.02, -0.01, 0.34), (1.0, -0.5, 2 / 3), (0.8, -0.2, 0.36)])
    def test_threshold(self, x_max, x_min, expected):
        p_star = attractiveness_threshold(BinaryLattice(x_max, x_min, 0.5))
        assert p_star == pytest.approx(expected, abs=1e-14)
        # direct arithmetic oracle for the margin at the threshold
        direct = p_star / (1 + x_max) + (1 - p_star) / (1 + x_min)
        assert direct == pytest.approx(1.0, abs=1e-12)

    @given(lattices)
    def test_margin_at_threshold_is_one(self, lat):
        p_star = attractiveness_threshold(lat)
        assert 0 < p_star < 1
        assert sufficient_attractiveness_margin(lat.with_p(p_star)) == pytest.approx(1.0, abs=1e-12)

    @given(lattices)
    def test_margin_strictly_decreasing_in_p(self, lat):
        margins = [sufficient_attractiveness_margin(lat.with_p(p / 10)) for p in range(11)]
        assert all(a > b for a, b in zip(margins, margins[1:]))


class TestSampling:
    def test_degenerate_probabilities(self):
        up = sample_path(BinaryLattice(0.02, -0.01, 1.0), 5, seed=1, path_index=0)
        down = sample_path(BinaryLattice(0.02, -0.01, 0.0), 5, seed=1, path_index=0)
        assert up.returns.tolist() == [0.02] * 5
        assert down.returns.tolist() == [-0.01] * 5

    def test_deterministic(self):
        lat = BinaryLattice(0.02, -0.01, 0.6)
        assert sample_path(lat, 50, 7, 3) == sample_path(lat, 50, 7, 3)
        assert sample_path(lat, 50, 7, 3) != sample_path(lat, 50, 7, 4)
        assert sample_path(lat, 50, 7, 3) != sample_path(lat, 50, 8, 3)

    def test_block_matches_individual_paths(self):
        pmf = EmpiricalPMF.from_returns([0.01, -0.01, 0.0, 0.02])
        block = sample_block(pmf, 9, 11, 5, 30)
        for row, j in enumerate(range(5, 30)):
            assert np.array_equal(block[row], sample_path(pmf, 9, 11, j).returns)

    @given(st.integers(0, 10_000), st.integers(0, 64), st.integers(0, 2**63 - 1))
    @settings(max_examples=50)
    def test_stream_positions_are_absolute(self, start, count, seed):
        whole = stream_uniforms(seed, start, count + 5)
        assert np.array_equal(stream_uniforms(seed, start + 5, count), whole[5:])

    def test_order_independent(self):
        lat = BinaryLattice(0.1, -0.1, 0.5)
        forward = [sample_path(lat, 4, 3, j).returns for j in range(20)]
        backward = [sample_path(lat, 4, 3, j).returns for j in reversed(range(20))][::-1]
        assert all(np.array_equal(a, b) for a, b in zip(forward, backward))

    def test_marginal_frequency(self):
        p = 0.6
        x = sample_block(BinaryLattice(0.02, -0.01, p), 100, 12345, 0, 1000)
        freq = np.mean(x == 0.02)
        sd = math.sqrt(p * (1 - p) / x.size)
        assert abs(freq - p) < 4 * sd

    def test_pmf_sampling_frequencies(self):
        pmf = EmpiricalPMF(((0.01, Fraction(1, 2)), (0.0, Fraction(1, 4)), (-0.01, Fraction(1, 4))))
        x = sample_block(pmf, 50, 99, 0, 2000)
        for v, w in pmf.atoms:
            sd = math.sqrt(float(w) * (1 - float(w)) / x.size)
            assert abs(np.mean(x == v) - float(w)) < 4 * sd

    def test_path_entries_within_bounds(self):
        lat = BinaryLattice(0.3, -0.2, 0.4)
        x = sample_block(lat, 20, 5, 0, 100)
        assert x.min() >= lat.x_min and x.max() <= lat.x_max

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            sample_path(BinaryLattice(0.1, -0.1, 0.5), 0, 1, 0)


class TestEnumeration:
    def test_single_stage(self):
        out = list(enumerate_paths(BinaryLattice(0.1, -0.1, 0.3), 1))
        assert [(p.returns.tolist(), pr) for p, pr in out] == [([0.1], 0.3), ([-0.1], pytest.approx(0.7))]

    def test_three_stages_fair(self):
        out = list(enumerate_paths(BinaryLattice(0.1, -0.1, 0.5), 3))
        assert len(out) == 8
        assert all(pr == 0.125 for _, pr in out)
        assert len({tuple(p.returns) for p, _ in out}) == 8

    def test_mass_n10(self):
        total = math.fsum(pr for _, pr in enumerate_paths(BinaryLattice(0.02, -0.01, 0.6), 10))
        assert total == pytest.approx(1.0, abs=1e-12)

    @given(lattices, st.integers(1, 16))
    @settings(max_examples=30, deadline=None)
    def test_mass_random(self, lat, n):
        total = math.fsum(math.fsum(pr) for _, pr in enumerate_blocks(lat, n))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_blocks_match_stream_order(self):
        lat = BinaryLattice(0.2, -0.1, 0.3)
        X, probs = next(enumerate_blocks(lat, 6))
        for row, (path, pr) in enumerate(enumerate_paths(lat, 6)):
            assert np.array_equal(X[row], path.returns)
            assert probs[row] == pytest.approx(pr, rel=1e-14)

    def test_cap(self):
        lat = BinaryLattice(0.1, -0.1, 0.5)
        with pytest.raises(EnumerationCapError, match="22"):
            next(enumerate_paths(lat, 23))
        with pytest.raises(EnumerationCapError, match="5"):
            next(enumerate_blocks(lat, 6, cap=5))

    def test_return_path_equality(self):
        assert ReturnPath(np.array([0.1])) == ReturnPath(np.array([0.1]))
