import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stcube.dataset import LineageTree
from stcube.render import bake_value_texture
from stcube.session import (
    HIGHLIGHTED,
    MASKED,
    NORMAL,
    SessionState,
    cycle_object_state,
    session_from_json,
    session_to_json,
    set_category_filter,
    set_property,
    set_time_cursor,
    set_time_window,
    set_value_filter,
    visibility_lut,
    visible,
)


@pytest.fixture(scope="module")
def wave_vt(waves):
    return bake_value_texture(waves, "volume")


@pytest.fixture(scope="module")
def gen_vt(waves):
    return bake_value_texture(waves, "generation")


def test_defaults():
    s = SessionState()
    assert s.value_filter is None and s.time_window is None
    assert s.time_cursor == 0 and s.active_gradient == "viridis"
    assert dict(s.object_states) == {}


def test_masking_dominates(waves, wave_vt):
    obj = waves.ids_at(0)[0]
    s = SessionState(object_states={obj: MASKED})
    assert not visible(s, wave_vt, obj, 0)
    # even with every filter wide open
    s = SessionState(
        object_states={obj: MASKED},
        value_filter=(0.0, 1.0),
        time_window=(0, 99),
        active_property="volume",
    )
    assert not visible(s, wave_vt, obj, 0)
    assert visible(SessionState(), wave_vt, obj, 0)


def test_time_window_inclusive(waves):
    obj = waves.ids_at(0)[0]
    s = SessionState(time_window=(3, 7))
    assert visible(s, None, obj, 3)
    assert visible(s, None, obj, 7)
    assert not visible(s, None, obj, 2)
    assert not visible(s, None, obj, 8)


def test_value_filter_semantics(waves, wave_vt):
    # literal comparison on the normalized grid; absent values fail the filter
    s = SessionState(active_property="volume", value_filter=(0.0, 1.0))
    some_obj = waves.ids_at(0)[0]
    assert wave_vt.has_value(some_obj, 0)
    assert visible(s, wave_vt, some_obj, 0)
    lo = wave_vt.value(some_obj, 0)
    tight = SessionState(active_property="volume", value_filter=(lo, lo))
    assert visible(tight, wave_vt, some_obj, 0)
    absent_obj = 299  # the last burst child does not exist at t = 0
    assert not wave_vt.has_value(absent_obj, 0)
    assert not visible(s, wave_vt, absent_obj, 0)
    # no filter: absence does not hide
    assert visible(SessionState(active_property="volume"), wave_vt, absent_obj, 0)


def test_category_filter(waves, gen_vt):
    obj = waves.ids_at(0)[0]
    assert gen_vt.label(obj, 0) == "gen0"
    s = SessionState(active_property="generation",
                     category_filter=frozenset({"gen0"}))
    assert visible(s, gen_vt, obj, 0)
    s2 = SessionState(active_property="generation",
                      category_filter=frozenset({"gen1"}))
    assert not visible(s2, gen_vt, obj, 0)


def test_setters_validate():
    s = SessionState()
    with pytest.raises(ValueError):
        set_value_filter(s, 0.6, 0.4)
    with pytest.raises(ValueError):
        set_time_window(s, 9, 3)
    s2 = set_time_window(s, 2, 8)
    assert s2.time_window == (2, 8)
    assert set_time_cursor(s2, 99).time_cursor == 8  # clamped into window
    assert set_time_cursor(s2, -5).time_cursor == 2
    assert set_value_filter(s, 0.2, 0.9).value_filter == (0.2, 0.9)
    assert set_category_filter(s, {"a"}).category_filter == frozenset({"a"})
    assert set_property(s, "volume").active_property == "volume"


def test_cycle_object_state_spreads_to_descendants(waves):
    from stcube.dataset import descendants, divisions_at

    lineage = waves.lineage
    divider = divisions_at(lineage, 10)[0]  # a root that divides at t=10
    s = SessionState()
    s1 = cycle_object_state(s, divider, lineage)
    latest = lineage.latest_instance(divider)
    family = {i for i, _ in descendants(lineage, divider, latest[1])}
    assert len(family) >= 3  # divider and two children
    for member in family:
        assert s1.object_states.get(member) == HIGHLIGHTED
    s2 = cycle_object_state(s1, divider, lineage)
    for member in family:
        assert s2.object_states.get(member) == MASKED
    s3 = cycle_object_state(s2, divider, lineage)
    assert dict(s3.object_states) == {}  # back to normal drops the entries


def test_cycle_is_three_periodic():
    l = LineageTree(nodes=[(5, 0)])
    s = SessionState()
    states = []
    for _ in range(3):
        s = cycle_object_state(s, 5, l)
        states.append(s.object_states.get(5, NORMAL))
    assert states == [HIGHLIGHTED, MASKED, NORMAL]


def test_visibility_lut_matches_pointwise(waves, wave_vt):
    time_map = np.arange(0, 40, dtype=np.int32)
    masked = waves.ids_at(0)[3]
    s = SessionState(
        active_property="volume",
        value_filter=(0.1, 0.9),
        time_window=(5, 30),
        object_states={masked: MASKED, waves.ids_at(0)[4]: HIGHLIGHTED},
    )
    max_id = 80
    lut = visibility_lut(s, wave_vt, max_id, time_map)
    assert lut.shape == (max_id + 1, len(time_map))
    assert not lut[0].any()  # background row
    for obj in range(1, max_id + 1):
        for k, t in enumerate(time_map):
            assert bool(lut[obj, k]) == visible(s, wave_vt, obj, int(t))


def test_json_round_trip():
    s = SessionState(
        value_filter=(0.25, 0.75),
        time_window=(2, 50),
        time_cursor=10,
        object_states={4: MASKED, 9: HIGHLIGHTED},
        active_property="volume",
        active_gradient="plasma",
        category_filter=frozenset({"gen0", "gen1"}),
    )
    data = json.loads(json.dumps(session_to_json(s)))
    back = session_from_json(data)
    assert back == s


def test_from_json_validates_and_clamps():
    assert session_from_json({}) == SessionState()
    s = session_from_json({"time_window": [3, 9], "time_cursor": 99})
    assert s.time_cursor == 9
    with pytest.raises(ValueError):
        session_from_json({"value_filter": [0.9, 0.1]})
    with pytest.raises(ValueError):
        session_from_json({"object_states": {"5": "glowing"}})


_filter_ops = st.fixed_dictionaries(
    {
        "value_filter": st.one_of(
            st.none(),
            st.tuples(
                st.floats(0, 0.5, allow_nan=False),
                st.floats(0.5, 1.0, allow_nan=False),
            ),
        ),
        "time_window": st.one_of(
            st.none(),
            st.tuples(st.integers(0, 20), st.integers(20, 39)),
        ),
        "category_filter": st.one_of(
            st.none(), st.sets(st.sampled_from(["gen0", "gen1", "gen2"]))
        ),
        "masked": st.sets(st.integers(1, 60), max_size=5),
    }
)


@settings(max_examples=100, deadline=None)
@given(ops=_filter_ops, order=st.permutations(range(4)))
def test_filter_application_order_is_irrelevant(waves_session_ctx, ops, order):
    vt, time_map = waves_session_ctx

    def apply_all(seq):
        s = SessionState(active_property="volume")
        for which in seq:
            if which == 0 and ops["value_filter"] is not None:
                s = set_value_filter(s, *ops["value_filter"])
            elif which == 1 and ops["time_window"] is not None:
                s = set_time_window(s, *ops["time_window"])
            elif which == 2 and ops["category_filter"] is not None:
                s = set_category_filter(s, ops["category_filter"])
            elif which == 3:
                flat = LineageTree(nodes=[(i, 0) for i in range(1, 61)])
                for obj in sorted(ops["masked"]):
                    s = cycle_object_state(s, obj, flat)
                    s = cycle_object_state(s, obj, flat)
        return s

    base = apply_all(range(4))
    shuffled = apply_all(order)
    assert base == shuffled
    lut_a = visibility_lut(base, vt, 80, time_map)
    lut_b = visibility_lut(shuffled, vt, 80, time_map)
    np.testing.assert_array_equal(lut_a, lut_b)


@pytest.fixture(scope="module")
def waves_session_ctx(waves, wave_vt):
    return wave_vt, np.arange(0, 40, dtype=np.int32)
