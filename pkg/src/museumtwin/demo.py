"""Demo museum fixture: two galleries joined by a doorway.

Used by the test suite, the shipped fixture files and the browser console.
Counts are load-bearing for the console tests: 2 rooms, 3 assets, 4 beacons.
"""

from __future__ import annotations

from .model import (
    Anchor,
    BeaconDevice,
    CapturePoint,
    PoiDeviceMapping,
    Portal,
    Room,
    SpaceModel,
    WallSegment,
)


def build_demo_space() -> SpaceModel:
    rooms = (
        Room(
            id="room-west",
            name="West Gallery",
            polygon=((-1.0, -1.0), (9.0, -1.0), (9.0, 7.0), (-1.0, 7.0)),
        ),
        Room(
            id="room-east",
            name="East Gallery",
            polygon=((9.0, -1.0), (19.0, -1.0), (19.0, 7.0), (9.0, 7.0)),
        ),
    )
    walls = (
        WallSegment(id="wall-divider", p1=(9.0, -1.0), p2=(9.0, 7.0)),
        WallSegment(id="wall-east-stub", p1=(14.0, -1.0), p2=(14.0, 4.0)),
    )
    portals = (Portal(id="portal-door", p1=(9.0, 2.5), p2=(9.0, 3.5)),)
    anchors = (
        Anchor(
            id="asset-david",
            kind="asset",
            title="David",
            description="Marble statue of David, centerpiece of the west gallery.",
            position=(2.0, 3.0, 1.5),
            room_id="room-west",
        ),
        Anchor(
            id="asset-venus",
            kind="asset",
            title="Venus",
            description="Renaissance painting of Venus on the north wall.",
            position=(6.0, 5.0, 1.2),
            room_id="room-west",
        ),
        Anchor(
            id="asset-nike",
            kind="asset",
            title="Nike",
            description="Winged victory sculpture in the east gallery.",
            position=(16.0, 5.0, 1.4),
            room_id="room-east",
        ),
        Anchor(
            id="label-west",
            kind="room_label",
            title="West Gallery",
            description="Gallery of renaissance sculpture.",
            position=(4.0, 6.5, 2.5),
            room_id="room-west",
        ),
    )
    beacons = (
        BeaconDevice(id="beacon-1", hardware_uid="AA:00:01", position=(1.0, 1.0, 2.0)),
        BeaconDevice(id="beacon-2", hardware_uid="AA:00:02", position=(8.0, 5.0, 2.0)),
        BeaconDevice(id="beacon-3", hardware_uid="AA:00:03", position=(11.0, 1.0, 2.0)),
        BeaconDevice(id="beacon-4", hardware_uid="AA:00:04", position=(17.0, 5.0, 2.0)),
    )
    mappings = (
        PoiDeviceMapping(asset_id="asset-david", beacon_id="beacon-1"),
        PoiDeviceMapping(asset_id="asset-venus", beacon_id="beacon-2"),
        PoiDeviceMapping(asset_id="asset-nike", beacon_id="beacon-4"),
    )
    capture_points = (
        CapturePoint(id="cp-0", order=0, pose=(0.0, 0.0), heading=0.0, eye_height=1.5),
        CapturePoint(id="cp-1", order=1, pose=(5.0, 3.0), heading=1.5707963267948966, eye_height=1.5),
        CapturePoint(id="cp-2", order=2, pose=(13.0, 3.0), heading=0.0, eye_height=1.5),
    )
    return SpaceModel(
        id="demo-museum",
        name="Demo Museum",
        floor=0,
        rooms=rooms,
        walls=walls,
        portals=portals,
        anchors=anchors,
        beacons=beacons,
        mappings=mappings,
        capture_points=capture_points,
        version=0,
    )


def demo_scenario_doc(space_path: str = "fixtures/demo_space.json") -> dict:
    """Reference scripted visit: walk from the twin origin to the two
    preferred assets with noiseless radio."""
    return {
        "space": space_path,
        "preferences": ["asset-venus", "asset-nike"],
        "walk": {"to": ["asset-venus", "asset-nike"], "start": [0.0, 0.0]},
        "config": {
            "seed": 20260808,
            "dt": 0.5,
            "speed": 1.0,
            "noise_sigma_db": 0.0,
            "smoothing_alpha": 1.0,
        },
    }
