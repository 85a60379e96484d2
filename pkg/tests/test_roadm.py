"""Node state model: switching constraints, atomicity, loss accounting."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsnet.errors import (
    DegreeInUseError,
    DisconnectedPathError,
    QuantumCollisionError,
    UnknownPortError,
    WavelengthCollisionError,
)
from qsnet.roadm import (
    AwgSpan,
    ConfigDelta,
    FibreSpan,
    LossTable,
    NodeSpan,
    Passband,
    QRoadmState,
    SignalKind,
    apply_config,
    passband_for,
    path_loss,
    reconfigure_degree,
)


def empty_state() -> QRoadmState:
    return QRoadmState()


class TestApplyConfig:
    def test_quantum_route_on_empty_node_accepted(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg2", "drop4"),)))
        assert ("deg2", "drop4") in state.quantum_routes

    def test_second_quantum_route_to_same_output_rejected(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg2", "drop4"),)))
        with pytest.raises(QuantumCollisionError):
            apply_config(state, ConfigDelta(add_quantum_routes=(("deg1", "drop4"),)))

    def test_wavelength_collision_on_one_port_rejected(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_passbands={"deg3": (passband_for(195.0),)}))
        with pytest.raises(WavelengthCollisionError):
            apply_config(state, ConfigDelta(
                add_passbands={"deg3": (Passband(195.01, 50.0),)}))

    def test_adjacent_grid_channels_coexist(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_passbands={"deg3": (passband_for(195.0), passband_for(195.1))}))
        assert len(state.wss_passbands["deg3"]) == 2

    def test_unknown_port_rejected(self):
        with pytest.raises(UnknownPortError):
            apply_config(empty_state(), ConfigDelta(
                add_quantum_routes=(("deg9", "deg1"),)))

    def test_quantum_spectrum_is_reserved(self):
        state = empty_state()
        with pytest.raises(WavelengthCollisionError):
            apply_config(state, ConfigDelta(
                add_passbands={"deg1": (passband_for(state.quantum_channel_thz),)}))

    def test_non_flexgrid_width_rejected(self):
        with pytest.raises(WavelengthCollisionError):
            apply_config(empty_state(), ConfigDelta(
                add_passbands={"deg1": (Passband(195.0, 30.0),)}))

    def test_rejected_delta_leaves_state_untouched(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg2", "drop4"),),
            add_passbands={"deg3": (passband_for(195.0),)}))
        before = state
        with pytest.raises(QuantumCollisionError):
            apply_config(state, ConfigDelta(
                add_passbands={"deg1": (passband_for(195.1),)},
                add_quantum_routes=(("deg3", "drop4"),)))
        assert state == before

    def test_scenario_swap_delta_yields_valid_matching(self):
        # state as after the second scenario: quantum deg1->deg3 and deg2->drop4
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg1", "deg3"), ("deg2", "drop4")),
            add_passbands={
                "deg1": (passband_for(195.0), passband_for(195.2)),
                "deg2": (passband_for(195.1), passband_for(195.3)),
                "deg3": (passband_for(195.0), passband_for(195.1)),
                "drop4": (passband_for(195.2), passband_for(195.3)),
            }))
        swap = ConfigDelta(
            remove_quantum_routes=(("deg1", "deg3"), ("deg2", "drop4")),
            add_quantum_routes=(("deg1", "drop4"), ("deg2", "deg3")),
            remove_passbands={"deg2": (passband_for(195.1),), "deg3": (passband_for(195.1),),
                              "deg1": (passband_for(195.2),), "drop4": (passband_for(195.2),)},
            add_passbands={"deg2": (passband_for(195.2),), "deg3": (passband_for(195.2),),
                           "deg1": (passband_for(195.1),), "drop4": (passband_for(195.1),)})
        after = apply_config(state, swap)
        # hand-enumerated matching: every port appears at most once per side
        assert after.quantum_routes == frozenset({("deg1", "drop4"), ("deg2", "deg3")})
        ins = [i for i, _ in after.quantum_routes]
        outs = [o for _, o in after.quantum_routes]
        assert len(set(ins)) == len(ins) and len(set(outs)) == len(outs)

    @given(st.lists(st.sampled_from(
        [("deg1", "deg2"), ("deg1", "deg3"), ("deg2", "deg3"),
         ("deg2", "drop4"), ("deg3", "drop4"), ("deg1", "drop4")]),
        min_size=1, max_size=5))
    @settings(max_examples=200)
    def test_no_output_ever_carries_two_quantum_channels(self, routes):
        state = empty_state()
        for route in routes:
            try:
                state = apply_config(state, ConfigDelta(add_quantum_routes=(route,)))
            except (QuantumCollisionError, UnknownPortError):
                pass
        outs = [o for _, o in state.quantum_routes]
        assert len(outs) == len(set(outs))


class TestDegrees:
    def test_add_fifth_degree(self):
        state = reconfigure_degree(empty_state(), "add")
        assert state.degrees == 5

    def test_remove_degree_with_active_route_rejected(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg2", "drop4"),)))
        with pytest.raises(DegreeInUseError):
            reconfigure_degree(state, "remove", 4)

    def test_add_then_remove_restores_state_field_for_field(self):
        original = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg2", "deg3"),),
            add_passbands={"deg1": (passband_for(195.0),)}))
        roundtrip = reconfigure_degree(reconfigure_degree(original, "add"), "remove")
        assert roundtrip == original


class TestPathLoss:
    def test_quantum_bypass_node_only(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg1", "deg3"),)))
        loss = path_loss(state, [NodeSpan("deg1", "deg3")], SignalKind.QUANTUM)
        assert loss == pytest.approx(5.3)
        assert loss <= 6.0

    def test_quantum_island_to_island_two_bypass(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg1", "deg3"),)))
        spans = [FibreSpan(5.0), NodeSpan("deg1", "deg3"), FibreSpan(5.0), AwgSpan()]
        # hand sum: 1.25 + 5.3 + 1.25 + 2.9
        assert path_loss(state, spans, SignalKind.QUANTUM) == pytest.approx(10.7)

    def test_data_drop_traversal_exact(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_passbands={"drop4": (passband_for(195.3),)}))
        loss = path_loss(state, [NodeSpan("deg2", "drop4", frequency_thz=195.3)],
                         SignalKind.DATA)
        assert loss == pytest.approx(8.5)

    def test_quantum_drop_and_add_node_figures(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg2", "drop4"), ("add4", "deg2"))))
        assert path_loss(state, [NodeSpan("deg2", "drop4")],
                         SignalKind.QUANTUM) == pytest.approx(5.9)
        assert path_loss(state, [NodeSpan("add4", "deg2")],
                         SignalKind.QUANTUM) == pytest.approx(1.2)

    def test_data_bypass_and_add_node_figures(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_passbands={"deg3": (passband_for(195.0),),
                           "deg2": (passband_for(195.1),)}))
        assert path_loss(state, [NodeSpan("deg1", "deg3", frequency_thz=195.0)],
                         SignalKind.DATA) == pytest.approx(23.0)
        assert path_loss(state, [NodeSpan("add4", "deg2", frequency_thz=195.1)],
                         SignalKind.DATA) == pytest.approx(21.5)

    def test_disconnected_quantum_path_rejected(self):
        with pytest.raises(DisconnectedPathError):
            path_loss(empty_state(), [NodeSpan("deg1", "deg3")], SignalKind.QUANTUM)

    def test_data_needs_covering_passband(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_passbands={"deg3": (passband_for(195.0),)}))
        with pytest.raises(DisconnectedPathError):
            path_loss(state, [NodeSpan("deg1", "deg3", frequency_thz=195.2)],
                      SignalKind.DATA)

    @given(st.floats(min_value=0, max_value=50), st.floats(min_value=0, max_value=50))
    def test_fibre_loss_additive(self, km1, km2):
        state = empty_state()
        joint = path_loss(state, [FibreSpan(km1), FibreSpan(km2)], SignalKind.QUANTUM)
        split = (path_loss(state, [FibreSpan(km1)], SignalKind.QUANTUM)
                 + path_loss(state, [FibreSpan(km2)], SignalKind.QUANTUM))
        assert joint == pytest.approx(split)

    def test_quantum_cheaper_than_data_over_same_path(self):
        state = apply_config(empty_state(), ConfigDelta(
            add_quantum_routes=(("deg1", "deg3"),),
            add_passbands={"deg3": (passband_for(195.0),)}))
        spans_q = [FibreSpan(5.0), NodeSpan("deg1", "deg3"), FibreSpan(5.0)]
        spans_d = [FibreSpan(5.0), NodeSpan("deg1", "deg3", frequency_thz=195.0),
                   FibreSpan(5.0)]
        assert (path_loss(state, spans_q, SignalKind.QUANTUM)
                < path_loss(state, spans_d, SignalKind.DATA))


class TestLossTable:
    def test_quantum_figures_below_data_enforced(self):
        with pytest.raises(Exception):
            LossTable(quantum_bypass_db=25.0)

    def test_negative_loss_rejected(self):
        with pytest.raises(Exception):
            LossTable(fibre_loss_per_km_db=-0.1)
