"""HTTP backend for the annotation workbench.

Serves images and their detector boxes, accepts shadow-endpoint annotations
with live height feedback, infers the capture time from a session's
annotations on demand, and persists every accepted annotation durably to the
record store (single writer per store path).

Data directory layout:

    data_dir/
      images/<image_id>.png     8-bit RGB
      labels/<image_id>.txt     detector boxes, one `class cx cy w h` line each
      meta/<image_id>.json      {"lat_deg", "lon_deg", "capture_date",
                                 "capture_time"?, "gt_heights_m"?, "gsd_m_per_px"?}

Endpoints (JSON bodies, pixel coordinates with origin top-left):

    GET  /images/<id>              PNG bytes
    GET  /images/<id>/boxes        box list
    POST /sessions                 {"image_id": ...} -> session state
    GET  /sessions/<id>            session state
    POST /sessions/<id>/annotations    {"bbox_index", "shadow_start_px",
                                        "shadow_end_px", "vertical_edge_px"?}
    POST /sessions/<id>/refine-time    {} -> time fit

Height numbers returned here come from the same core functions the CLI
uses, so service and CLI answers are bit-identical for identical inputs.
"""
from __future__ import annotations

import json
import re
import threading
import uuid
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .dataset.records import AnnotationRecord, RecordStore, record_to_line
from .dataset.yolo import BoundingBox, parse_yolo_labels
from .errors import (
    MissingLabels,
    NoGroundTruth,
    OutOfBoundsEndpoints,
    SessionClosed,
    ShadowHeightError,
    SunBelowHorizon,
    UnknownImage,
)
from .geometry import DEFAULT_GSD, GroundSampling, height_from_shadow, shadow_length_from_endpoints
from .solar import GeoLocation, solar_noon, solar_position
from .timefit import TimeFit, infer_capture_time


@dataclass
class Session:
    session_id: str
    image_id: str
    loc: GeoLocation
    capture_date: date
    capture_time: datetime | None  # from image metadata, when known
    gsd: GroundSampling
    n_boxes: int
    gt_heights_m: list
    resolved_time: datetime | None = None
    cursor: int = 0
    annotations: dict = field(default_factory=dict)  # bbox_index -> (start, end, vertical)

    def to_payload(self) -> dict:
        return {
            "session_id": self.session_id,
            "image_id": self.image_id,
            "lat_deg": self.loc.lat_deg,
            "lon_deg": self.loc.lon_deg,
            "capture_date": self.capture_date.isoformat(),
            "resolved_time": _iso(self.resolved_time),
            "cursor": self.cursor,
            "n_boxes": self.n_boxes,
            "n_annotated": len(self.annotations),
            "gsd_m_per_px": self.gsd.meters_per_pixel,
        }


def _iso(t: datetime | None):
    if t is None:
        return None
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class AnnotationService:
    """Session and store logic, independent of HTTP plumbing."""

    def __init__(self, data_dir, store_path, *, gsd: GroundSampling = DEFAULT_GSD):
        self.data_dir = Path(data_dir)
        self.default_gsd = gsd
        self.store = RecordStore(store_path).open_writer()
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def close(self) -> None:
        self.store.close()

    # -- image data -------------------------------------------------------

    def _image_path(self, image_id: str) -> Path:
        if not re.fullmatch(r"[A-Za-z0-9_.-]+", image_id):
            raise UnknownImage(f"invalid image id {image_id!r}")
        path = self.data_dir / "images" / f"{image_id}.png"
        if not path.exists():
            raise UnknownImage(f"no image {image_id!r} under {self.data_dir}")
        return path

    def image_bytes(self, image_id: str) -> bytes:
        return self._image_path(image_id).read_bytes()

    def image_size(self, image_id: str):
        from PIL import Image
        with Image.open(self._image_path(image_id)) as im:
            return im.size  # (width, height)

    def boxes(self, image_id: str) -> list[BoundingBox]:
        self._image_path(image_id)
        label_path = self.data_dir / "labels" / f"{image_id}.txt"
        if not label_path.exists():
            raise MissingLabels(f"no label file for image {image_id!r}")
        parsed, _errors = parse_yolo_labels(label_path.read_text(encoding="utf-8"))
        return parsed

    def _meta(self, image_id: str) -> dict:
        meta_path = self.data_dir / "meta" / f"{image_id}.json"
        if not meta_path.exists():
            raise MissingLabels(f"no metadata file for image {image_id!r}")
        return json.loads(meta_path.read_text(encoding="utf-8"))

    # -- sessions ---------------------------------------------------------

    def open_session(self, image_id: str) -> tuple[Session, list[BoundingBox]]:
        boxes = self.boxes(image_id)
        meta = self._meta(image_id)
        capture_time = None
        if meta.get("capture_time"):
            capture_time = datetime.strptime(
                meta["capture_time"], "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
        session = Session(
            session_id=uuid.uuid4().hex,
            image_id=image_id,
            loc=GeoLocation(meta["lat_deg"], meta["lon_deg"]),
            capture_date=date.fromisoformat(meta["capture_date"]),
            capture_time=capture_time,
            gsd=GroundSampling(meta.get("gsd_m_per_px", self.default_gsd.meters_per_pixel)),
            n_boxes=len(boxes),
            gt_heights_m=list(meta.get("gt_heights_m") or [None] * len(boxes)),
        )
        with self._lock:
            self.sessions[session.session_id] = session
        return session, boxes

    def get_session(self, session_id: str) -> Session:
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise SessionClosed(f"no open session {session_id!r}")
        return session

    def _effective_time(self, session: Session) -> tuple[datetime, str]:
        if session.capture_time is not None:
            return session.capture_time, "metadata"
        if session.resolved_time is not None:
            return session.resolved_time, "inferred"
        return solar_noon(session.loc, session.capture_date), "solar_noon"

    def submit_annotation(self, session_id: str, bbox_index: int, start_px, end_px,
                          vertical_edge_px=None) -> dict:
        session = self.get_session(session_id)
        with self._lock:
            boxes = self.boxes(session.image_id)
            if not (0 <= bbox_index < len(boxes)):
                raise OutOfBoundsEndpoints(f"bbox index {bbox_index} outside 0..{len(boxes) - 1}")
            width, height = self.image_size(session.image_id)
            for px in (start_px, end_px):
                x, y = float(px[0]), float(px[1])
                if not (0.0 <= x <= width and 0.0 <= y <= height):
                    raise OutOfBoundsEndpoints(
                        f"endpoint ({x:.1f}, {y:.1f}) outside {width}x{height} image")

            when, time_source = self._effective_time(session)
            sigma = solar_position(session.loc, when)
            if sigma.elevation_deg <= 0:
                raise SunBelowHorizon(
                    f"provisional time {when} has the sun below the horizon")
            shadow_m = shadow_length_from_endpoints(start_px, end_px, session.gsd)
            est_height = height_from_shadow(shadow_m, sigma)

            gt = session.gt_heights_m[bbox_index] if bbox_index < len(session.gt_heights_m) else None
            record = AnnotationRecord(
                image_id=session.image_id,
                bbox=boxes[bbox_index],
                loc=session.loc,
                capture_date=session.capture_date,
                shadow_start_px=(float(start_px[0]), float(start_px[1])),
                shadow_end_px=(float(end_px[0]), float(end_px[1])),
                vertical_edge_px=vertical_edge_px,
                capture_time=when,
                gt_height_m=gt,
            )
            self.store.append(record)
            session.annotations[bbox_index] = (tuple(start_px), tuple(end_px), vertical_edge_px)
            # Advance the cursor to the next unannotated box, clamped in range.
            nxt = next((i for i in range(len(boxes)) if i not in session.annotations),
                       len(boxes) - 1)
            session.cursor = nxt

        response = {
            "stored": json.loads(record_to_line(record)),
            "est_height_m": est_height,
            "shadow_length_m": shadow_m,
            "time_source": time_source,
            "time_used": _iso(when),
            "cursor": session.cursor,
        }
        if gt is not None:
            response["gt_height_m"] = gt
            response["abs_error_m"] = abs(est_height - gt)
        return response

    def refine_session_time(self, session_id: str) -> TimeFit:
        session = self.get_session(session_id)
        with self._lock:
            pairs = []
            for idx, (start, end, _v) in sorted(session.annotations.items()):
                gt = session.gt_heights_m[idx] if idx < len(session.gt_heights_m) else None
                if gt is None:
                    continue
                pairs.append((shadow_length_from_endpoints(start, end, session.gsd), gt))
            if not pairs:
                raise NoGroundTruth("no annotated building in this session has a known height")
            fit = infer_capture_time(session.capture_date, session.loc, pairs)
            session.resolved_time = fit.best_time
        return fit


# -- HTTP layer -------------------------------------------------------------

_ROUTES = [
    ("GET", re.compile(r"^/images/([A-Za-z0-9_.-]+)/boxes$"), "boxes"),
    ("GET", re.compile(r"^/images/([A-Za-z0-9_.-]+)$"), "image"),
    ("POST", re.compile(r"^/sessions$"), "open_session"),
    ("GET", re.compile(r"^/sessions/([a-f0-9]+)$"), "get_session"),
    ("POST", re.compile(r"^/sessions/([a-f0-9]+)/annotations$"), "annotate"),
    ("POST", re.compile(r"^/sessions/([a-f0-9]+)/refine-time$"), "refine"),
]

_ERROR_STATUS = {
    "UnknownImage": 404,
    "SessionClosed": 404,
    "MissingLabels": 409,
    "OutOfBoundsEndpoints": 400,
    "SunBelowHorizon": 409,
    "PolarNight": 409,
    "NoGroundTruth": 409,
    "EmptyInput": 400,
}


def _timefit_payload(fit: TimeFit) -> dict:
    return {
        "best_time": _iso(fit.best_time),
        "residual_rmse_m": fit.residual_rmse_m,
        "n_buildings": fit.n_buildings,
        "search_step_s": fit.search_step_s,
        "local_minima": [[_iso(t), r] for t, r in fit.local_minima],
    }


class _Handler(BaseHTTPRequestHandler):
    service: AnnotationService = None
    ui_dir: Path | None = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, payload, status=200):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, data: bytes, content_type: str):
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _read_json(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        return json.loads(raw or b"{}")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def _dispatch(self, method):
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(self.path)
            if match:
                try:
                    getattr(self, "_route_" + name)(*match.groups())
                except ShadowHeightError as exc:
                    status = _ERROR_STATUS.get(type(exc).__name__, 400)
                    self._send_json({"error": type(exc).__name__, "message": str(exc)},
                                    status=status)
                except (ValueError, KeyError) as exc:
                    self._send_json({"error": "BadRequest", "message": str(exc)}, status=400)
                return
        if method == "GET" and self.ui_dir is not None:
            self._serve_static()
            return
        self._send_json({"error": "NotFound", "message": self.path}, status=404)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def _serve_static(self):
        rel = self.path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            self._send_json({"error": "NotFound", "message": self.path}, status=404)
            return
        types = {".html": "text/html", ".js": "text/javascript", ".css": "text/css"}
        self._send_bytes(target.read_bytes(), types.get(target.suffix, "application/octet-stream"))

    # -- routes ----------------------------------------------------------

    def _route_image(self, image_id):
        self._send_bytes(self.service.image_bytes(image_id), "image/png")

    def _route_boxes(self, image_id):
        boxes = self.service.boxes(image_id)
        width, height = self.service.image_size(image_id)
        self._send_json({
            "image_id": image_id,
            "width": width,
            "height": height,
            "boxes": [{"class_id": b.class_id, "cx": b.cx, "cy": b.cy,
                       "w": b.w, "h": b.h} for b in boxes],
        })

    def _route_open_session(self):
        body = self._read_json()
        session, boxes = self.service.open_session(body["image_id"])
        width, height = self.service.image_size(session.image_id)
        payload = session.to_payload()
        payload["width"] = width
        payload["height"] = height
        payload["boxes"] = [{"class_id": b.class_id, "cx": b.cx, "cy": b.cy,
                             "w": b.w, "h": b.h} for b in boxes]
        payload["gt_heights_m"] = session.gt_heights_m
        self._send_json(payload, status=201)

    def _route_get_session(self, session_id):
        self._send_json(self.service.get_session(session_id).to_payload())

    def _route_annotate(self, session_id):
        body = self._read_json()
        result = self.service.submit_annotation(
            session_id,
            int(body["bbox_index"]),
            tuple(body["shadow_start_px"]),
            tuple(body["shadow_end_px"]),
            body.get("vertical_edge_px"),
        )
        self._send_json(result)

    def _route_refine(self, session_id):
        fit = self.service.refine_session_time(session_id)
        self._send_json(_timefit_payload(fit))


def make_server(data_dir, store_path, port: int = 0, *,
                gsd: GroundSampling = DEFAULT_GSD, ui_dir=None):
    """Build (server, service); caller runs serve_forever and closes both."""
    service = AnnotationService(data_dir, store_path, gsd=gsd)
    handler = type("BoundHandler", (_Handler,),
                   {"service": service, "ui_dir": Path(ui_dir) if ui_dir else None})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    return server, service


def serve(data_dir, store_path, port: int, *, gsd: GroundSampling = DEFAULT_GSD,
          ui_dir=None) -> int:
    server, service = make_server(data_dir, store_path, port, gsd=gsd, ui_dir=ui_dir)
    host, bound_port = server.server_address
    # Flush so supervising processes see the bound port immediately.
    print(f"annotation service listening on http://{host}:{bound_port}", flush=True)
    print(f"store: {service.store.path}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        service.close()
    return 0
