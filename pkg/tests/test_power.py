"""
Tests for the receiver power model.
"""

import numpy as np
import pytest
from src.config import SystemConfig
from src.errors import DimensionMismatchError, InvalidParameterError
from src.power import BitAllocation, PowerBreakdown, adc_power, relaxed_adc_power, switching_power, total_power


class TestAdcPower:
    """Tests for the per-ADC power."""

    def test_four_bits(self, paper_config):
        """Test 494 fJ · 1 GHz · 16 = 7.904 mW."""
        assert adc_power(4, paper_config) == pytest.approx(7.904e-3)

    def test_zero_bits_draw_nothing(self, paper_config):
        """Test a deactivated ADC draws no power while the relaxed form does."""
        assert adc_power(0, paper_config) == 0.0
        assert relaxed_adc_power(0, paper_config) == pytest.approx(494e-6)

    def test_vectorized(self, paper_config):
        """Test arrays are evaluated element-wise."""
        np.testing.assert_allclose(adc_power(np.array([0, 1, 2]), paper_config), [0.0, 988e-6, 1976e-6])

    def test_negative_bits(self, paper_config):
        """Test negative resolutions are rejected."""
        with pytest.raises(InvalidParameterError):
            adc_power(-1, paper_config)


class TestSwitchingPower:
    """Tests for the resolution-switching power."""

    def test_step_up(self, paper_config):
        """Test 1 → 3 bits costs 3.47 mW · 6 = 20.82 mW."""
        assert switching_power(3, 1, paper_config) == pytest.approx(20.82e-3)

    def test_step_down(self, paper_config):
        """Test 3 → 1 bits costs 0.94 mW · 6 = 5.64 mW."""
        assert switching_power(1, 3, paper_config) == pytest.approx(5.64e-3)

    def test_unchanged_is_free(self, paper_config):
        """Test equal resolutions cost nothing."""
        assert switching_power(5, 5, paper_config) == 0.0

    def test_from_deactivated(self, paper_config):
        """Test 0 → 2 counts 2^0 = 1 as the previous level."""
        assert switching_power(2, 0, paper_config) == pytest.approx(3.47e-3 * 3)

    def test_vectorized(self, paper_config):
        """Test arrays mix up and down steps."""
        out = switching_power(np.array([3, 1, 2]), np.array([1, 3, 2]), paper_config)

        np.testing.assert_allclose(out, [20.82e-3, 5.64e-3, 0.0])


class TestBitAllocation:
    """Tests for the allocation value type."""

    def test_from_zero(self):
        """Test the previous state of a fresh allocation is all zeros."""
        alloc = BitAllocation.from_zero(np.array([2, 0, 3]))

        np.testing.assert_array_equal(alloc.prev_bits, [0, 0, 0])
        assert alloc.n_act == 2

    def test_advance(self):
        """Test the current bits become the previous bits."""
        alloc = BitAllocation.from_zero(np.array([1, 2])).advance(np.array([3, 0]))

        np.testing.assert_array_equal(alloc.prev_bits, [1, 2])
        np.testing.assert_array_equal(alloc.bits, [3, 0])

    def test_b_cap_enforced(self):
        """Test bits above the cap are rejected in either vector when a cap is given."""
        with pytest.raises(InvalidParameterError, match="b_cap"):
            BitAllocation(bits=np.array([3, 13]), prev_bits=np.array([0, 0]), b_cap=12)
        with pytest.raises(InvalidParameterError, match="b_cap"):
            BitAllocation(bits=np.array([3, 1]), prev_bits=np.array([0, 9]), b_cap=8)

        alloc = BitAllocation(bits=np.array([3, 13]), prev_bits=np.array([0, 0]))
        assert alloc.b_cap is None

    def test_advance_keeps_b_cap(self):
        """Test the next block is checked against the same cap."""
        alloc = BitAllocation.from_zero(np.array([2, 4]), b_cap=4)

        with pytest.raises(InvalidParameterError):
            alloc.advance(np.array([5, 0]))
        assert alloc.advance(np.array([4, 0])).b_cap == 4

    @pytest.mark.parametrize(
        "bits, prev, error",
        [
            (np.array([1, -1]), np.array([0, 0]), InvalidParameterError),
            (np.array([1.5, 1.0]), np.array([0, 0]), InvalidParameterError),
            (np.array([[1, 1]]), np.array([[0, 0]]), InvalidParameterError),
            (np.array([1, 2]), np.array([0, 0, 0]), DimensionMismatchError),
        ],
    )
    def test_invalid(self, bits, prev, error):
        """Test malformed allocations are rejected."""
        with pytest.raises(error):
            BitAllocation(bits=bits, prev_bits=prev)


class TestTotalPower:
    """Tests for the receiver total."""

    def test_single_chain_hand_value(self):
        """Test N_r=256, one chain at 4 bits (prev 4) gives 7.936 W."""
        cfg = SystemConfig(n_rf=1)

        breakdown = total_power(BitAllocation(bits=np.array([4]), prev_bits=np.array([4])), cfg)

        assert breakdown.lna == pytest.approx(5.12)
        assert breakdown.ps + breakdown.rf_chain == pytest.approx(2.60)
        assert breakdown.adc == pytest.approx(0.015808)
        assert breakdown.switching == 0.0
        assert breakdown.total == pytest.approx(7.935808)

    def test_deactivation_saves_chain_power(self, paper_config):
        """Test turning one chain off saves N_r·P_PS + P_RF + 2·P_ADC + switching difference."""
        bits = np.full(paper_config.n_rf, 4)
        on = total_power(BitAllocation(bits=bits, prev_bits=bits), paper_config)
        off_bits = bits.copy()
        off_bits[0] = 0
        off = total_power(BitAllocation(bits=off_bits, prev_bits=bits), paper_config)

        expected = 2.6 + 2 * 7.904e-3 - 2 * switching_power(0, 4, paper_config)
        assert on.total - off.total == pytest.approx(expected)
        assert off.n_act == paper_config.n_rf - 1

    def test_all_off_keeps_fixed_part(self, desk_config):
        """Test an all-zero allocation draws only LNA and baseband power."""
        zeros = np.zeros(desk_config.n_rf, dtype=int)

        breakdown = total_power(BitAllocation.from_zero(zeros), desk_config)

        assert breakdown.total == pytest.approx(64 * 0.02 + 0.2)
        assert breakdown.n_act == 0

    def test_as_dict_resums(self, desk_config, rng):
        """Test the printed components add up to the printed total."""
        bits = rng.integers(0, 6, desk_config.n_rf)

        values = total_power(BitAllocation.from_zero(bits), desk_config).as_dict()

        parts = ("lna", "ps", "rf_chain", "adc", "switching", "baseband")
        assert sum(values[name] for name in parts) == values["total"]
        assert set(values) == set(parts) | {"total", "n_act"}

    def test_wrong_length(self, desk_config):
        """Test allocations must have N_RF entries."""
        with pytest.raises(DimensionMismatchError):
            total_power(BitAllocation.from_zero(np.zeros(3, dtype=int)), desk_config)

    def test_above_cap(self, tiny_config):
        """Test bits above b_cap are rejected."""
        with pytest.raises(InvalidParameterError):
            total_power(BitAllocation.from_zero(np.array([5, 0, 0, 0])), tiny_config)

    def test_breakdown_is_plain_data(self):
        """Test PowerBreakdown totals its fields."""
        breakdown = PowerBreakdown(lna=1.0, ps=0.5, rf_chain=0.25, adc=0.125, switching=0.0, baseband=0.1, n_act=2)

        assert breakdown.total == pytest.approx(1.975)
