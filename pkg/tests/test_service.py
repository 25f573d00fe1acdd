"""Annotation service tests over real HTTP."""
import json
import threading
import urllib.error
import urllib.request
from datetime import datetime, timezone

import numpy as np
import pytest

from shadowheight.dataset import RecordStore, random_scene, serialize_yolo_labels
from shadowheight.dataset.raster import save_png
from shadowheight.service import make_server
from shadowheight.solar import GeoLocation

LOC = GeoLocation(31.23, 121.47)
CAPTURE_TIME = datetime(2015, 6, 1, 2, 30, 0, tzinfo=timezone.utc)


def build_data_dir(root, *, with_time=True, with_heights=True, n=6, seed=0):
    """Synthetic scene laid out as a service data directory."""
    (root / "images").mkdir(parents=True)
    (root / "labels").mkdir()
    (root / "meta").mkdir()
    img, records = random_scene(np.random.default_rng(seed), n, LOC, CAPTURE_TIME,
                                image_id="scene_1")
    save_png(img, root / "images" / "scene_1.png")
    (root / "labels" / "scene_1.txt").write_text(
        serialize_yolo_labels([r.bbox for r in records]))
    meta = {
        "lat_deg": LOC.lat_deg,
        "lon_deg": LOC.lon_deg,
        "capture_date": "2015-06-01",
        "gsd_m_per_px": 2.5,
    }
    if with_time:
        meta["capture_time"] = "2015-06-01T02:30:00Z"
    if with_heights:
        meta["gt_heights_m"] = [r.gt_height_m for r in records]
    (root / "meta" / "scene_1.json").write_text(json.dumps(meta))
    return records


@pytest.fixture
def live_service(tmp_path):
    records = build_data_dir(tmp_path / "data")
    store_path = tmp_path / "store.ndrec"
    server, service = make_server(tmp_path / "data", store_path)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        yield base, records, store_path
    finally:
        server.shutdown()
        server.server_close()
        service.close()
        thread.join(timeout=5)


def api(base, path, payload=None):
    if payload is None:
        req = urllib.request.Request(base + path)
    else:
        req = urllib.request.Request(base + path, data=json.dumps(payload).encode(),
                                     headers={"Content-Type": "application/json"},
                                     method="POST")
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def api_error(base, path, payload=None):
    try:
        api(base, path, payload)
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())
    raise AssertionError("expected an HTTP error")


class TestSessions:

    def test_open_session_returns_boxes(self, live_service):
        base, records, _ = live_service
        session = api(base, "/sessions", {"image_id": "scene_1"})
        assert session["cursor"] == 0
        assert session["n_boxes"] == len(records)
        assert len(session["boxes"]) == len(records)

    def test_unknown_image_404(self, live_service):
        base, _, _ = live_service
        code, body = api_error(base, "/sessions", {"image_id": "nope"})
        assert code == 404 and body["error"] == "UnknownImage"

    def test_missing_labels_conflict(self, tmp_path):
        records = build_data_dir(tmp_path / "data")
        (tmp_path / "data" / "labels" / "scene_1.txt").unlink()
        server, service = make_server(tmp_path / "data", tmp_path / "s.ndrec")
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            code, body = api_error(base, "/sessions", {"image_id": "scene_1"})
            assert code == 409 and body["error"] == "MissingLabels"
        finally:
            server.shutdown()
            server.server_close()
            service.close()

    def test_two_sessions_distinct_ids(self, live_service):
        base, _, _ = live_service
        s1 = api(base, "/sessions", {"image_id": "scene_1"})
        s2 = api(base, "/sessions", {"image_id": "scene_1"})
        assert s1["session_id"] != s2["session_id"]
        assert s1["boxes"] == s2["boxes"]

    def test_get_session_state(self, live_service):
        base, records, _ = live_service
        opened = api(base, "/sessions", {"image_id": "scene_1"})
        sid = opened["session_id"]
        state = api(base, f"/sessions/{sid}")
        assert state["session_id"] == sid
        assert state["cursor"] == 0
        assert state["n_annotated"] == 0
        api(base, f"/sessions/{sid}/annotations", {
            "bbox_index": 0,
            "shadow_start_px": list(records[0].shadow_start_px),
            "shadow_end_px": list(records[0].shadow_end_px)})
        state = api(base, f"/sessions/{sid}")
        assert state["cursor"] == 1 and state["n_annotated"] == 1
        code, _ = api_error(base, "/sessions/0123456789abcdef")
        assert code == 404

    def test_image_bytes_served(self, live_service):
        base, _, _ = live_service
        with urllib.request.urlopen(base + "/images/scene_1") as resp:
            data = resp.read()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"


class TestAnnotations:

    def test_submit_returns_height_and_error(self, live_service):
        base, records, _ = live_service
        session = api(base, "/sessions", {"image_id": "scene_1"})
        record = records[0]
        result = api(base, f"/sessions/{session['session_id']}/annotations", {
            "bbox_index": 0,
            "shadow_start_px": list(record.shadow_start_px),
            "shadow_end_px": list(record.shadow_end_px),
        })
        # Exact synthetic endpoints at the true capture time: error ~ 0.
        assert result["time_source"] == "metadata"
        assert result["abs_error_m"] == pytest.approx(0.0, abs=1e-9)
        assert result["est_height_m"] == pytest.approx(record.gt_height_m, abs=1e-9)
        assert result["cursor"] == 1

    def test_simple_triangle_estimate(self, live_service):
        # 3-4-5 triangle at 2.5 m/px: 12.5 m shadow.
        base, _, _ = live_service
        session = api(base, "/sessions", {"image_id": "scene_1"})
        result = api(base, f"/sessions/{session['session_id']}/annotations", {
            "bbox_index": 0,
            "shadow_start_px": [100.0, 100.0],
            "shadow_end_px": [103.0, 104.0],
        })
        assert result["shadow_length_m"] == pytest.approx(12.5)

    def test_coincident_endpoints_zero_height(self, live_service):
        base, _, _ = live_service
        session = api(base, "/sessions", {"image_id": "scene_1"})
        result = api(base, f"/sessions/{session['session_id']}/annotations", {
            "bbox_index": 1,
            "shadow_start_px": [50.0, 50.0],
            "shadow_end_px": [50.0, 50.0],
        })
        assert result["est_height_m"] == 0.0

    def test_out_of_bounds_endpoints(self, live_service):
        base, _, _ = live_service
        session = api(base, "/sessions", {"image_id": "scene_1"})
        code, body = api_error(base, f"/sessions/{session['session_id']}/annotations", {
            "bbox_index": 0,
            "shadow_start_px": [-5.0, 10.0],
            "shadow_end_px": [10.0, 10.0],
        })
        assert code == 400 and body["error"] == "OutOfBoundsEndpoints"

    def test_closed_session_404(self, live_service):
        base, _, _ = live_service
        code, body = api_error(base, "/sessions/deadbeef/annotations", {
            "bbox_index": 0, "shadow_start_px": [0, 0], "shadow_end_px": [1, 1]})
        assert code == 404 and body["error"] == "SessionClosed"

    def test_annotations_durable_across_restart(self, live_service, tmp_path):
        base, records, store_path = live_service
        session = api(base, "/sessions", {"image_id": "scene_1"})
        for i in range(3):
            api(base, f"/sessions/{session['session_id']}/annotations", {
                "bbox_index": i,
                "shadow_start_px": list(records[i].shadow_start_px),
                "shadow_end_px": list(records[i].shadow_end_px),
            })
        stored = RecordStore(store_path).records()
        assert len(stored) == 3
        # Replaying the file yields the identical record set.
        replay = RecordStore(store_path).records()
        assert replay == stored

    def test_matches_cli_estimate_exactly(self, live_service):
        # Service and CLI share the same core: identical formatted output.
        from shadowheight.cli import main as cli_main
        base, _, _ = live_service
        session = api(base, "/sessions", {"image_id": "scene_1"})
        result = api(base, f"/sessions/{session['session_id']}/annotations", {
            "bbox_index": 0,
            "shadow_start_px": [100.0, 100.0],
            "shadow_end_px": [103.0, 104.0],
        })
        import io
        from contextlib import redirect_stdout
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = cli_main(["estimate", "--start-px", "100.0,100.0",
                             "--end-px", "103.0,104.0",
                             "--lat", str(LOC.lat_deg), "--lon", str(LOC.lon_deg),
                             "--time", "2015-06-01T02:30:00Z"])
        assert code == 0
        assert buf.getvalue().strip() == f"height_m: {result['est_height_m']:.3f}"


class TestTimeChain:

    def test_solar_noon_fallback_without_metadata_time(self, tmp_path):
        build_data_dir(tmp_path / "data", with_time=False)
        server, service = make_server(tmp_path / "data", tmp_path / "s.ndrec")
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            session = api(base, "/sessions", {"image_id": "scene_1"})
            result = api(base, f"/sessions/{session['session_id']}/annotations", {
                "bbox_index": 0, "shadow_start_px": [10, 10], "shadow_end_px": [20, 20]})
            assert result["time_source"] == "solar_noon"
        finally:
            server.shutdown()
            server.server_close()
            service.close()

    def test_refine_time_then_inferred_source(self, tmp_path):
        records = build_data_dir(tmp_path / "data", with_time=False)
        server, service = make_server(tmp_path / "data", tmp_path / "s.ndrec")
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            session = api(base, "/sessions", {"image_id": "scene_1"})
            sid = session["session_id"]
            for i, record in enumerate(records):
                api(base, f"/sessions/{sid}/annotations", {
                    "bbox_index": i,
                    "shadow_start_px": list(record.shadow_start_px),
                    "shadow_end_px": list(record.shadow_end_px),
                })
            fit = api(base, f"/sessions/{sid}/refine-time", {})
            best = datetime.strptime(fit["best_time"], "%Y-%m-%dT%H:%M:%SZ").replace(
                tzinfo=timezone.utc)
            assert abs((best - CAPTURE_TIME).total_seconds()) <= 120
            assert fit["residual_rmse_m"] < 0.01
            # Subsequent submissions use the inferred time.
            result = api(base, f"/sessions/{sid}/annotations", {
                "bbox_index": 0,
                "shadow_start_px": list(records[0].shadow_start_px),
                "shadow_end_px": list(records[0].shadow_end_px),
            })
            assert result["time_source"] == "inferred"
            assert result["abs_error_m"] < 0.05
            # Deterministic on unchanged annotations... cursor state aside.
            fit2 = api(base, f"/sessions/{sid}/refine-time", {})
            assert fit2["best_time"] == fit["best_time"]
            assert fit2["residual_rmse_m"] == fit["residual_rmse_m"]
        finally:
            server.shutdown()
            server.server_close()
            service.close()

    def test_refine_without_ground_truth(self, tmp_path):
        build_data_dir(tmp_path / "data", with_heights=False)
        server, service = make_server(tmp_path / "data", tmp_path / "s.ndrec")
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            session = api(base, "/sessions", {"image_id": "scene_1"})
            sid = session["session_id"]
            api(base, f"/sessions/{sid}/annotations", {
                "bbox_index": 0, "shadow_start_px": [10, 10], "shadow_end_px": [20, 20]})
            code, body = api_error(base, f"/sessions/{sid}/refine-time", {})
            assert code == 409 and body["error"] == "NoGroundTruth"
        finally:
            server.shutdown()
            server.server_close()
            service.close()


class TestStoreLocking:

    def test_second_service_on_same_store_refused(self, tmp_path):
        from shadowheight.errors import StoreLocked
        build_data_dir(tmp_path / "data")
        server, service = make_server(tmp_path / "data", tmp_path / "s.ndrec")
        try:
            with pytest.raises(StoreLocked):
                make_server(tmp_path / "data", tmp_path / "s.ndrec")
        finally:
            server.server_close()
            service.close()
