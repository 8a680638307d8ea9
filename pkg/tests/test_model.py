"""Spatial model: validation rules, versioned mutation, persistence."""

import dataclasses
import json
import os

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from museumtwin import spaceio
from museumtwin.model import (
    Anchor,
    BeaconDevice,
    CapturePoint,
    InvalidMutationError,
    Mutation,
    PoiDeviceMapping,
    Portal,
    Room,
    SpaceModel,
    UnknownIdError,
    WallSegment,
    apply_mutation,
    validate_space,
)


class TestValidate:
    def test_demo_model_is_clean(self, demo_model):
        report = validate_space(demo_model)
        assert report.errors == []

    def test_duplicate_identifier(self, demo_model):
        clone = dataclasses.replace(
            demo_model,
            anchors=demo_model.anchors
            + (Anchor(id="a1", kind="poi", title="", description="", position=(1, 1, 0)),
               Anchor(id="a1", kind="poi", title="", description="", position=(2, 2, 0))),
        )
        report = validate_space(clone)
        assert any("duplicate identifier a1" in e for e in report.errors)

    def test_dangling_mapping_reference(self, demo_model):
        clone = dataclasses.replace(
            demo_model,
            mappings=demo_model.mappings + (PoiDeviceMapping(asset_id="asset-david", beacon_id="b9"),),
        )
        report = validate_space(clone)
        assert any("dangling reference b9" in e for e in report.errors)

    def test_degenerate_polygon(self):
        model = SpaceModel(
            id="s", name="",
            rooms=(Room(id="r", name="", polygon=((0, 0), (4, 0))),),
        )
        assert not validate_space(model).ok

    def test_self_intersecting_polygon(self):
        bowtie = ((0, 0), (4, 4), (4, 0), (0, 4))
        model = SpaceModel(id="s", name="", rooms=(Room(id="r", name="", polygon=bowtie),))
        assert not validate_space(model).ok

    def test_asset_outside_rooms_is_error(self, demo_model):
        clone = dataclasses.replace(
            demo_model,
            anchors=demo_model.anchors
            + (Anchor(id="stray", kind="asset", title="", description="", position=(50, 50, 1)),),
        )
        assert any("outside all rooms" in e for e in validate_space(clone).errors)

    def test_label_outside_rooms_is_warning(self, demo_model):
        clone = dataclasses.replace(
            demo_model,
            anchors=demo_model.anchors
            + (Anchor(id="sign", kind="room_label", title="", description="", position=(50, 50, 1)),),
        )
        report = validate_space(clone)
        assert report.ok
        assert any("sign" in w for w in report.warnings)

    def test_unmapped_asset_warning(self, demo_model):
        clone = dataclasses.replace(demo_model, mappings=demo_model.mappings[:1])
        report = validate_space(clone)
        assert report.ok
        assert any("no beacon mapping" in w for w in report.warnings)

    def test_beacon_param_ranges(self, demo_model):
        bad = BeaconDevice(id="bx", hardware_uid="", position=(0, 0, 0),
                           tx_power_dbm_at_1m=5.0, path_loss_exponent=9.0)
        clone = dataclasses.replace(demo_model, beacons=demo_model.beacons + (bad,))
        errors = validate_space(clone).errors
        assert any("path_loss_exponent" in e for e in errors)
        assert any("tx_power_dbm_at_1m" in e for e in errors)

    def test_double_mapping_rejected(self, demo_model):
        clone = dataclasses.replace(
            demo_model,
            mappings=demo_model.mappings + (PoiDeviceMapping("asset-david", "beacon-3"),),
        )
        assert any("mapped twice" in e for e in validate_space(clone).errors)

    def test_capture_point_origin_rule(self, demo_model):
        moved = dataclasses.replace(demo_model.capture_points[0], pose=(1.0, 0.0))
        clone = dataclasses.replace(
            demo_model, capture_points=(moved,) + demo_model.capture_points[1:]
        )
        assert any("origin" in e for e in validate_space(clone).errors)

    def test_capture_point_orders_contiguous(self, demo_model):
        skipped = dataclasses.replace(demo_model.capture_points[2], order=5)
        clone = dataclasses.replace(
            demo_model, capture_points=demo_model.capture_points[:2] + (skipped,)
        )
        assert any("contiguous" in e for e in validate_space(clone).errors)


class TestApplyMutation:
    def test_add_beacon_bumps_version(self, demo_model):
        beacon = BeaconDevice(id="b-new", hardware_uid="XX", position=(3, 3, 2))
        out = apply_mutation(demo_model, Mutation("add", "beacon", entity=beacon))
        assert out.version == demo_model.version + 1
        assert out.beacon_by_id("b-new") is not None
        # input snapshot untouched
        assert demo_model.beacon_by_id("b-new") is None

    def test_remove_unknown_id(self, demo_model):
        with pytest.raises(UnknownIdError):
            apply_mutation(demo_model, Mutation("remove", "anchor", target_id="nope"))

    def test_update_changes_only_named_fields(self, demo_model):
        out = apply_mutation(
            demo_model,
            Mutation("update", "anchor", target_id="asset-david",
                     fields={"description": "updated text"}),
        )
        before = demo_model.anchor_by_id("asset-david")
        after = out.anchor_by_id("asset-david")
        assert after.description == "updated text"
        assert dataclasses.replace(after, description=before.description) == before
        # untouched entities are the same objects
        assert out.rooms == demo_model.rooms
        assert out.beacons == demo_model.beacons

    def test_invalid_mutation_rejected_atomically(self, demo_model):
        # beacon-1 is mapped; removing it would dangle the mapping
        with pytest.raises(InvalidMutationError):
            apply_mutation(demo_model, Mutation("remove", "beacon", target_id="beacon-1"))

    def test_duplicate_add_rejected(self, demo_model):
        dupe = BeaconDevice(id="beacon-1", hardware_uid="", position=(0, 0, 0))
        with pytest.raises(InvalidMutationError):
            apply_mutation(demo_model, Mutation("add", "beacon", entity=dupe))

    def test_accepted_mutation_validates(self, demo_model):
        wall = WallSegment(id="w-extra", p1=(0, 0), p2=(1, 1))
        out = apply_mutation(demo_model, Mutation("add", "wall", entity=wall))
        assert validate_space(out).errors == []

    def test_remove_mapping_by_asset_id(self, demo_model):
        out = apply_mutation(demo_model, Mutation("remove", "mapping", target_id="asset-david"))
        assert out.mapping_for_asset("asset-david") is None


class TestPersistence:
    def test_round_trip_demo(self, demo_model, tmp_path):
        path = tmp_path / "space.json"
        spaceio.save_space(demo_model, path)
        assert spaceio.load_space(path) == demo_model

    def test_truncated_file_names_offset(self, demo_model, tmp_path):
        path = tmp_path / "space.json"
        spaceio.save_space(demo_model, path)
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(spaceio.SpaceParseError) as err:
            spaceio.load_space(path)
        assert "byte offset" in str(err.value)
        assert err.value.offset > 0

    def test_unknown_field_warns(self, demo_model):
        doc = spaceio.space_to_doc(demo_model)
        doc["future_field"] = {"x": 1}
        doc["anchors"][0]["style"] = "baroque"
        model, warnings = spaceio.space_from_doc(doc)
        assert model == demo_model
        joined = "\n".join(warnings)
        assert "future_field" in joined and "style" in joined

    def test_missing_required_field_fatal(self, demo_model):
        doc = spaceio.space_to_doc(demo_model)
        del doc["anchors"][0]["position"]
        with pytest.raises(spaceio.SpaceFormatError):
            spaceio.space_from_doc(doc)

    def test_heading_degree_tag(self, demo_model):
        doc = spaceio.space_to_doc(demo_model)
        doc["capture_points"][1]["heading"] = {"deg": 90.0}
        model, _ = spaceio.space_from_doc(doc)
        cp = next(c for c in model.capture_points if c.order == 1)
        assert cp.heading == pytest.approx(demo_model.capture_points[1].heading)

    def test_save_is_atomic_under_crash(self, demo_model, tmp_path, monkeypatch):
        path = tmp_path / "space.json"
        spaceio.save_space(demo_model, path)
        original = path.read_bytes()

        bigger = apply_mutation(
            demo_model,
            Mutation("add", "beacon",
                     entity=BeaconDevice(id="b-crash", hardware_uid="", position=(2, 2, 2))),
        )

        def boom(src, dst):
            raise OSError("injected crash between temp write and rename")

        monkeypatch.setattr(spaceio.os, "replace", boom)
        with pytest.raises(OSError):
            spaceio.save_space(bigger, path)
        monkeypatch.undo()
        assert path.read_bytes() == original
        assert not [p for p in path.parent.iterdir() if p.suffix == ".tmp"]

    def test_save_rejects_invalid_model(self, demo_model, tmp_path):
        broken = dataclasses.replace(
            demo_model,
            mappings=demo_model.mappings + (PoiDeviceMapping("asset-david", "ghost"),),
        )
        with pytest.raises(spaceio.SpaceValidationError):
            spaceio.save_space(broken, tmp_path / "x.json")


# -- randomized model generator ---------------------------------------------

_ident = st.from_regex(r"[a-z][a-z0-9\-]{0,10}", fullmatch=True)
_coord = st.floats(min_value=-50, max_value=50, allow_nan=False).map(lambda v: round(v, 3))


@st.composite
def space_models(draw):
    """Valid-by-construction spaces: rectangular rooms, in-room assets,
    bijective mappings, contiguous capture orders."""
    n_rooms = draw(st.integers(1, 3))
    rooms = []
    for i in range(n_rooms):
        x0 = draw(st.floats(-20, 20).map(lambda v: round(v, 2)))
        y0 = draw(st.floats(-20, 20).map(lambda v: round(v, 2)))
        w = draw(st.floats(2, 15).map(lambda v: round(v, 2)))
        h = draw(st.floats(2, 15).map(lambda v: round(v, 2)))
        rooms.append(Room(
            id=f"room-{i}", name=f"Room {i}",
            polygon=((x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)),
        ))
    anchors = []
    for i in range(draw(st.integers(0, 4))):
        room = rooms[draw(st.integers(0, n_rooms - 1))]
        (x0, y0), _, (x1, y1), _ = room.polygon
        fx = draw(st.floats(0.1, 0.9))
        fy = draw(st.floats(0.1, 0.9))
        kind = draw(st.sampled_from(["asset", "poi", "room_label"]))
        anchors.append(Anchor(
            id=f"anchor-{i}", kind=kind, title=f"A{i}", description="d",
            position=(round(x0 + fx * (x1 - x0), 3), round(y0 + fy * (y1 - y0), 3),
                      draw(st.floats(0, 3).map(lambda v: round(v, 2)))),
            room_id=room.id,
        ))
    beacons = tuple(
        BeaconDevice(
            id=f"beacon-{i}", hardware_uid=f"hw-{i}",
            position=(draw(_coord), draw(_coord), draw(st.floats(0, 4).map(lambda v: round(v, 2)))),
            tx_power_dbm_at_1m=draw(st.floats(-90, -30).map(lambda v: round(v, 1))),
            path_loss_exponent=draw(st.floats(1.0, 4.0).map(lambda v: round(v, 2))),
        )
        for i in range(draw(st.integers(0, 3)))
    )
    asset_ids = [a.id for a in anchors if a.kind == "asset"]
    mappings = tuple(
        PoiDeviceMapping(asset_id=aid, beacon_id=beacons[i].id)
        for i, aid in enumerate(asset_ids[: len(beacons)])
        if draw(st.booleans())
    )
    walls = tuple(
        WallSegment(id=f"wall-{i}", p1=(draw(_coord), draw(_coord)), p2=(draw(_coord), draw(_coord)))
        for i in range(draw(st.integers(0, 2)))
    )
    walls = tuple(w for w in walls if w.p1 != w.p2)
    n_caps = draw(st.integers(0, 3))
    capture_points = tuple(
        CapturePoint(
            id=f"cp-{k}", order=k,
            pose=(0.0, 0.0) if k == 0 else (draw(_coord), draw(_coord)),
            heading=0.0 if k == 0 else draw(st.floats(-3.14, 3.14).map(lambda v: round(v, 3))),
        )
        for k in range(n_caps)
    )
    return SpaceModel(
        id=draw(_ident), name="generated", floor=draw(st.integers(0, 3)),
        rooms=tuple(rooms), walls=walls, anchors=tuple(anchors),
        beacons=beacons, mappings=mappings, capture_points=capture_points,
        version=draw(st.integers(0, 40)),
    )


class TestModelProperties:
    @given(space_models())
    @settings(max_examples=40, suppress_health_check=[HealthCheck.too_slow])
    def test_generated_models_validate(self, model):
        assert validate_space(model).errors == []

    @given(model=space_models())
    @settings(max_examples=40, suppress_health_check=[HealthCheck.too_slow])
    def test_round_trip_equality(self, model, tmp_path_factory):
        path = tmp_path_factory.mktemp("spaces") / "m.json"
        spaceio.save_space(model, path)
        assert spaceio.load_space(path) == model

    @given(space_models(), st.floats(0, 4).map(lambda v: round(v, 2)))
    @settings(max_examples=30, suppress_health_check=[HealthCheck.too_slow])
    def test_accepted_mutations_stay_valid(self, model, z):
        beacon = BeaconDevice(id="zz-new-beacon", hardware_uid="x", position=(1.0, 1.0, z))
        out = apply_mutation(model, Mutation("add", "beacon", entity=beacon))
        assert validate_space(out).errors == []
        assert out.version == model.version + 1

    @given(space_models())
    @settings(max_examples=30, suppress_health_check=[HealthCheck.too_slow])
    def test_mapping_bijection(self, model):
        assets = [m.asset_id for m in model.mappings]
        beacons = [m.beacon_id for m in model.mappings]
        assert len(assets) == len(set(assets))
        assert len(beacons) == len(set(beacons))
