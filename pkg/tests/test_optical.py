"""Physical-layer model tests.

Expected values are computed independently here (linear-domain power sums,
hand-evaluated quadratics, standalone interpolation) and frozen, so these
tests never mirror the implementation's own arithmetic.
"""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsnet.errors import InvalidArgumentError, SchemaError, UnsupportedConfigurationError
from qsnet.optical import (
    AwgModel,
    CoexistenceSpec,
    Modulation,
    OpticalChannel,
    PathClass,
    Provenance,
    QuantumLink,
    aggregate_coexistence_power,
    awg_quantum_loss,
    coexistence_window,
    estimate_prefec_ber,
    estimate_skr_qber,
    estimate_skr_qber_at,
    load_calibration_table,
)

QPSK, QAM8, QAM16 = Modulation.PM_QPSK, Modulation.PM_8QAM, Modulation.PM_16QAM
BB, BD = PathClass.BYPASS_BYPASS, PathClass.BYPASS_DROP


def lerp_series(series, p):
    """Independent piecewise-linear oracle."""
    pts = [(pt.power_dbm, pt.skr_bps, pt.qber) for pt in series.points]
    for (x0, s0, q0), (x1, s1, q1) in zip(pts, pts[1:]):
        if x0 <= p <= x1:
            t = (p - x0) / (x1 - x0)
            return s0 + t * (s1 - s0), q0 + t * (q1 - q0)
    raise AssertionError("probe outside series")


class TestAggregatePower:
    def test_two_channels_published_value(self):
        assert aggregate_coexistence_power(-27.5, 2) == pytest.approx(-24.49, abs=0.01)

    def test_three_channels_published_value(self):
        assert aggregate_coexistence_power(-27.5, 3) == pytest.approx(-22.73, abs=0.01)

    @given(st.floats(min_value=-35, max_value=5))
    def test_single_channel_identity(self, p):
        assert aggregate_coexistence_power(p, 1) == p

    @given(st.floats(min_value=-35, max_value=5), st.integers(min_value=1, max_value=64))
    def test_matches_linear_domain_sum(self, p, n):
        # oracle: convert to mW, multiply, convert back
        total_mw = n * 10 ** (p / 10.0)
        assert aggregate_coexistence_power(p, n) == pytest.approx(
            10 * math.log10(total_mw), abs=1e-9)

    def test_rejects_zero_channels(self):
        with pytest.raises(InvalidArgumentError):
            aggregate_coexistence_power(-27.5, 0)


class TestAwgLoss:
    def test_minimum_at_optimal_temperature(self):
        model = AwgModel()
        assert awg_quantum_loss(model.optimal_temperature, model) == pytest.approx(2.9)

    def test_hand_evaluated_detuning(self):
        # 2.9 + 1.5 * 2.0^2 = 8.9, evaluated by hand
        model = AwgModel(optimal_temperature=30.0, detuning_coefficient_db=1.5)
        assert awg_quantum_loss(32.0, model) == pytest.approx(8.9)

    @given(st.floats(min_value=0, max_value=20))
    def test_symmetric_in_detuning_sign(self, d):
        model = AwgModel()
        t = model.optimal_temperature
        assert awg_quantum_loss(t + d, model) == pytest.approx(awg_quantum_loss(t - d, model))

    def test_minimum_attained_only_at_optimum(self):
        model = AwgModel()
        floor = awg_quantum_loss(model.optimal_temperature, model)
        samples = [model.optimal_temperature + k * 0.1 for k in range(-100, 101) if k != 0]
        assert all(awg_quantum_loss(t, model) > floor for t in samples)


class TestSkrEstimator:
    def test_published_single_channel_maximum(self, table):
        skr, _ = estimate_skr_qber_at(table, BB, 1, QPSK, -28.0)
        assert skr == 178.0

    def test_published_27pct_decrease_at_minus_25(self, table):
        skr, _ = estimate_skr_qber_at(table, BB, 1, QPSK, -25.0)
        assert skr == pytest.approx(178.0 * 0.73, abs=2.0)

    def test_published_two_and_three_channel_anchors(self, table):
        assert estimate_skr_qber_at(table, BB, 2, QPSK, -27.5)[0] == 138.0
        assert estimate_skr_qber_at(table, BB, 3, QPSK, -27.5)[0] == 110.0

    def test_published_15_and_36pct_drops_at_minus_26(self, table):
        assert estimate_skr_qber_at(table, BB, 2, QPSK, -26.0)[0] == pytest.approx(
            138.0 * 0.85, abs=2.0)
        assert estimate_skr_qber_at(table, BB, 3, QPSK, -26.0)[0] == pytest.approx(
            110.0 * 0.64, abs=2.0)

    def test_anchor_points_returned_verbatim(self, table):
        for series in table.series:
            for pt in series.points:
                skr, qber = estimate_skr_qber_at(
                    table, series.path_class, series.n_channels, series.modulation,
                    pt.power_dbm)
                expected = min(pt.skr_bps, 1100.0) if series.path_class is BD else pt.skr_bps
                assert skr == expected
                assert qber == pt.qber

    def test_interpolation_matches_independent_lerp(self, table):
        series = table.find(BB, 1, QPSK)
        for p in (-27.2, -26.0, -24.1, -23.5):
            skr, qber = estimate_skr_qber_at(table, BB, 1, QPSK, p)
            exp_skr, exp_qber = lerp_series(series, p)
            assert skr == pytest.approx(exp_skr)
            assert qber == pytest.approx(exp_qber)

    def test_zero_outside_window_both_sides(self, table):
        lo, hi = table.find(BB, 1, QPSK).window
        assert estimate_skr_qber_at(table, BB, 1, QPSK, lo - 1e-6)[0] == 0.0
        assert estimate_skr_qber_at(table, BB, 1, QPSK, hi + 1e-6)[0] == 0.0

    def test_drop_port_capped_at_1100(self, table):
        for series in table.series:
            if series.path_class is not BD:
                continue
            lo, hi = series.window
            for k in range(101):
                p = lo + (hi - lo) * k / 100
                skr, _ = estimate_skr_qber_at(table, BD, series.n_channels,
                                              series.modulation, p)
                assert skr <= 1100.0

    def test_drop_superiority_over_bypass(self, table):
        for series in table.series:
            if series.path_class is not BB:
                continue
            drop = table.find(BD, series.n_channels, series.modulation)
            if drop is None:
                continue
            lo = max(series.window[0], drop.window[0])
            hi = min(series.window[1], drop.window[1])
            for k in range(51):
                p = lo + (hi - lo) * k / 50
                skr_bb, _ = estimate_skr_qber_at(table, BB, series.n_channels,
                                                 series.modulation, p)
                skr_bd, _ = estimate_skr_qber_at(table, BD, series.n_channels,
                                                 series.modulation, p)
                assert skr_bd >= skr_bb

    @given(st.data())
    @settings(max_examples=200)
    def test_monotone_in_power_within_series(self, table, data):
        series = data.draw(st.sampled_from(table.series))
        lo, hi = series.window
        p1 = data.draw(st.floats(min_value=lo, max_value=hi))
        p2 = data.draw(st.floats(min_value=lo, max_value=hi))
        if p1 > p2:
            p1, p2 = p2, p1
        skr1, qber1 = estimate_skr_qber_at(table, series.path_class,
                                           series.n_channels, series.modulation, p1)
        skr2, qber2 = estimate_skr_qber_at(table, series.path_class,
                                           series.n_channels, series.modulation, p2)
        assert skr1 >= skr2
        assert qber1 <= qber2

    def test_unknown_series_rejected(self, table):
        with pytest.raises(UnsupportedConfigurationError):
            estimate_skr_qber_at(table, BB, 7, QPSK, -25.0)

    def test_link_wrapper_uses_coexistence_spec(self, table):
        link = QuantumLink(alice_island=2, bob_island=4, path_class=BD,
                           path_loss_db=7.4,
                           coexistence=CoexistenceSpec(1, QPSK, -25.0))
        skr, qber = estimate_skr_qber(link, table)
        assert skr == 950.0
        assert link.coexistence_power_dbm == pytest.approx(-25.0)


class TestCoexistenceWindow:
    def test_qpsk_window_width_about_5db(self, table):
        lo, hi = coexistence_window(QPSK, 1, BB, table)
        assert hi - lo == pytest.approx(5.0, abs=0.5)
        assert lo == pytest.approx(-28.0)

    def test_16qam_minimum_and_1db_width(self, table):
        lo, hi = coexistence_window(QAM16, 1, BB, table)
        assert lo == pytest.approx(-21.4)
        assert hi - lo == pytest.approx(1.0, abs=0.3)

    def test_no_series_means_infeasible(self, table):
        assert coexistence_window(QAM8, 1, BB, table) is None

    def test_estimator_zero_just_below_window(self, table):
        lo, _ = coexistence_window(QPSK, 1, BB, table)
        skr, _ = estimate_skr_qber_at(table, BB, 1, QPSK, lo - 1e-9)
        assert skr == 0.0

    def test_ber_under_threshold_across_each_window(self, table):
        for series in table.series:
            window = coexistence_window(series.modulation, series.n_channels,
                                        series.path_class, table)
            if window is None:
                continue
            lo, hi = window
            channel = OpticalChannel(frequency_thz=195.0, modulation=series.modulation)
            for k in range(21):
                p = lo + (hi - lo) * k / 20
                assert estimate_prefec_ber(channel, series.path_class, p) < 4.0e-2


class TestBerModel:
    @given(st.floats(min_value=-35, max_value=5), st.floats(min_value=0.01, max_value=10))
    def test_strictly_decreasing_in_power(self, p, dp):
        channel = OpticalChannel(frequency_thz=195.0, modulation=QPSK)
        if p + dp > 5:
            return
        assert estimate_prefec_ber(channel, BB, p + dp) < estimate_prefec_ber(channel, BB, p)

    @given(st.floats(min_value=-35, max_value=5))
    def test_denser_modulation_is_worse(self, p):
        qpsk = OpticalChannel(frequency_thz=195.0, modulation=QPSK)
        qam = OpticalChannel(frequency_thz=195.0, modulation=QAM16)
        assert estimate_prefec_ber(qam, BB, p) > estimate_prefec_ber(qpsk, BB, p)

    @given(st.floats(min_value=-35, max_value=5))
    def test_drop_path_outperforms_bypass(self, p):
        channel = OpticalChannel(frequency_thz=195.0, modulation=QPSK)
        assert estimate_prefec_ber(channel, BD, p) < estimate_prefec_ber(channel, BB, p)

    def test_qpsk_bypass_at_minus_25_under_threshold(self):
        channel = OpticalChannel(frequency_thz=195.0, modulation=QPSK)
        assert estimate_prefec_ber(channel, BB, -25.0) < 4.0e-2

    @given(st.floats(min_value=-35, max_value=5))
    def test_bounded_as_a_probability(self, p):
        channel = OpticalChannel(frequency_thz=195.0, modulation=QAM16)
        assert 0.0 < estimate_prefec_ber(channel, BB, p) < 0.5

    def test_launch_power_validity_range_enforced(self):
        with pytest.raises(InvalidArgumentError):
            OpticalChannel(frequency_thz=195.0, modulation=QPSK, launch_power_dbm=-40.0)


class TestCalibrationFile:
    def test_shipped_table_loads_with_provenance(self, table):
        tags = {pt.provenance for s in table.series for pt in s.points}
        assert Provenance.PAPER in tags and Provenance.SYNTHETIC in tags

    def test_monotonicity_violation_rejected_with_location(self, tmp_path):
        bad = {
            "series": [{
                "path_class": "BYPASS_BYPASS", "n_channels": 1, "modulation": "PM-QPSK",
                "points": [
                    {"power_dbm": -28, "skr_bps": 100, "qber": 0.03, "provenance": "SYNTHETIC"},
                    {"power_dbm": -26, "skr_bps": 150, "qber": 0.05, "provenance": "SYNTHETIC"},
                ]}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(SchemaError) as err:
            load_calibration_table(path)
        assert "series[0].points[1]" in str(err.value)

    def test_qber_regression_rejected(self, tmp_path):
        bad = {
            "series": [{
                "path_class": "BYPASS_BYPASS", "n_channels": 1, "modulation": "PM-QPSK",
                "points": [
                    {"power_dbm": -28, "skr_bps": 150, "qber": 0.05, "provenance": "SYNTHETIC"},
                    {"power_dbm": -26, "skr_bps": 100, "qber": 0.03, "provenance": "SYNTHETIC"},
                ]}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(SchemaError):
            load_calibration_table(path)

    def test_drop_cap_violation_rejected(self, tmp_path):
        bad = {
            "series": [{
                "path_class": "BYPASS_DROP", "n_channels": 1, "modulation": "PM-QPSK",
                "points": [
                    {"power_dbm": -28, "skr_bps": 1200, "qber": 0.03, "provenance": "SYNTHETIC"},
                    {"power_dbm": -26, "skr_bps": 900, "qber": 0.05, "provenance": "SYNTHETIC"},
                ]}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(SchemaError):
            load_calibration_table(path)

    def test_paper_anchor_values_in_shipped_file(self, table):
        # the values the published record fixes, straight off the table
        expected = {
            (BB, 1, QPSK, -28.0): 178.0,
            (BB, 2, QPSK, -27.5): 138.0,
            (BB, 3, QPSK, -27.5): 110.0,
            (BD, 1, QPSK, -28.0): 1100.0,
        }
        for (pc, n, mod, power), skr in expected.items():
            series = table.find(pc, n, mod)
            point = next(pt for pt in series.points if pt.power_dbm == power)
            assert point.skr_bps == skr
            assert point.provenance is Provenance.PAPER
