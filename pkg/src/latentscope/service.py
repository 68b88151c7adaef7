"""HTTP facade over the generator: sampling, traversals, arithmetic, anchors.

Every rendered PNG is content-addressed under /images/{sha256}.png, so
identical requests resolve to identical URLs and clients can compare results
by URL alone. Latent vectors stay on the server; handlers hand out opaque
ids backed by a session file, and the export endpoint is the only place a
raw vector crosses the wire.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, File, Query, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import __version__
from .anchors import AnchorStore
from .engine import GeneratorModel, forward
from .errors import LatentScopeError, NotFoundError, ValidationError
from .image import ImageBuffer, atomic_write_bytes, compose_grid, encode_png_bytes, tensor_to_image
from .latent import (
    AnchorSet,
    ArithmeticExpression,
    LatentVector,
    average_anchors,
    circular_interpolation,
    evaluate_arithmetic,
    extrapolate_two_sided,
    lerp,
    parse_latent,
    sample_latents,
    serialize_latent,
    slerp,
)
from .weights import load_model_bytes, model_info

_IMAGE_NAME = re.compile(r"[0-9a-f]{64}\.png")

# HTTP status per domain error code; anything unlisted is a 400.
_STATUS_BY_CODE = {
    "not-found": 404,
    "conflict": 409,
    "io": 500,
    "numeric": 500,
}


def _envelope(code: str, message: str, detail=None) -> dict:
    return {"code": code, "message": message, "detail": detail}


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class ServiceState:
    """Disk-backed state: model files, image cache, session latents, anchors.

    All mutation goes through one lock; reads of immutable content-addressed
    artifacts (model files, cached PNGs) are lock-free.
    """

    def __init__(self, state_dir, store_path=None):
        self.state_dir = Path(state_dir)
        self.models_dir = self.state_dir / "models"
        self.images_dir = self.state_dir / "images"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.images_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.state_dir / "models.json"
        self.session_path = self.state_dir / "session.json"
        self.store = AnchorStore(store_path or self.state_dir / "anchors.json")
        self._lock = threading.Lock()
        self._model_cache: dict[str, GeneratorModel] = {}

    def _read_json(self, path: Path, default: dict) -> dict:
        if not path.exists():
            return default
        return json.loads(path.read_text(encoding="utf-8"))

    def _write_json(self, path: Path, data: dict) -> None:
        atomic_write_bytes(path, (json.dumps(data, indent=2) + "\n").encode("utf-8"))

    # -- models --

    def register_model(self, data: bytes, filename: str) -> dict:
        model = load_model_bytes(data)  # validate before any write
        model_id = hashlib.sha256(data).hexdigest()
        with self._lock:
            path = self.models_dir / f"{model_id}.lgw1"
            if not path.exists():
                atomic_write_bytes(path, data)
            index = self._read_json(self.index_path, {"models": {}})
            if model_id not in index["models"]:
                entry = model_info(model)
                entry.update(
                    model_id=model_id,
                    filename=filename,
                    uploaded_at=_utc_now(),
                )
                index["models"][model_id] = entry
                self._write_json(self.index_path, index)
            self._model_cache[model_id] = model
            return index["models"][model_id]

    def list_models(self) -> list[dict]:
        with self._lock:
            index = self._read_json(self.index_path, {"models": {}})
        return sorted(index["models"].values(), key=lambda e: e["uploaded_at"])

    def get_model(self, model_id: str) -> GeneratorModel:
        with self._lock:
            cached = self._model_cache.get(model_id)
        if cached is not None:
            return cached
        path = self.models_dir / f"{model_id}.lgw1"
        if not path.is_file():
            raise NotFoundError(f"unknown model id {model_id!r}")
        model = load_model_bytes(path.read_bytes())
        with self._lock:
            self._model_cache[model_id] = model
        return model

    # -- session latents --

    def register_latents(self, vs: list[LatentVector]) -> list[str]:
        """Store latents under deterministic opaque ids, one file write."""
        records = [serialize_latent(v) for v in vs]
        ids = ["L" + hashlib.sha256(r.encode("utf-8")).hexdigest()[:16] for r in records]
        with self._lock:
            session = self._read_json(self.session_path, {"latents": {}})
            dirty = False
            for lid, rec in zip(ids, records):
                if session["latents"].get(lid) != rec:
                    session["latents"][lid] = rec
                    dirty = True
            if dirty:
                self._write_json(self.session_path, session)
        return ids

    def resolve_latent(self, latent_id: str) -> LatentVector:
        with self._lock:
            session = self._read_json(self.session_path, {"latents": {}})
        record = session["latents"].get(latent_id)
        if record is None:
            raise NotFoundError(f"unknown latent id {latent_id!r}")
        return parse_latent(record)

    def latent_record(self, latent_id: str) -> str:
        with self._lock:
            session = self._read_json(self.session_path, {"latents": {}})
        record = session["latents"].get(latent_id)
        if record is None:
            raise NotFoundError(f"unknown latent id {latent_id!r}")
        return record

    # -- image cache --

    def cache_png(self, png: bytes) -> str:
        digest = hashlib.sha256(png).hexdigest()
        path = self.images_dir / f"{digest}.png"
        if not path.exists():
            # idempotent: a concurrent duplicate write lands the same bytes
            atomic_write_bytes(path, png)
        return f"/images/{digest}.png"

    def render(self, model: GeneratorModel, z: LatentVector) -> tuple[ImageBuffer, str]:
        img = tensor_to_image(forward(model, z))
        return img, self.cache_png(encode_png_bytes(img))


# -- request bodies --

_strict = ConfigDict(extra="forbid", protected_namespaces=())


class SampleRequest(BaseModel):
    model_config = _strict
    model_id: str
    count: int = Field(default=16, ge=1, le=256)
    seed: int = 0


class EndpointSpec(BaseModel):
    model_config = _strict
    latent_ids: tuple[str, str] | None = None
    seeds: tuple[int, int] | None = None


class TraverseRequest(BaseModel):
    model_config = _strict
    model_id: str
    kind: Literal["linear", "extrapolate", "circular", "slerp"]
    endpoints: EndpointSpec
    n: int = Field(default=16, ge=2, le=256)
    grid_cols: int = Field(default=4, ge=1)
    radius: float = 1.0


class ArithmeticTerm(BaseModel):
    model_config = _strict
    sign: Literal["+", "-"]
    anchor_set: str


class ArithmeticRequest(BaseModel):
    model_config = _strict
    model_id: str
    terms: list[ArithmeticTerm] = Field(min_length=1)


class AnchorCreateRequest(BaseModel):
    model_config = _strict
    name: str = Field(min_length=1)
    tags: list[str] = Field(default_factory=list)
    latent_ids: list[str] = Field(min_length=1)
    overwrite: bool = False


def create_app(state_dir, store_path=None, frontend_dir=None) -> FastAPI:
    """Build the application. `frontend_dir`, when present, is served at /."""
    state = ServiceState(state_dir, store_path)
    app = FastAPI(title="latentscope", version=__version__)

    @app.exception_handler(LatentScopeError)
    def _domain_error(request: Request, exc: LatentScopeError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(_envelope(exc.code, str(exc), exc.detail), status_code=status)

    @app.exception_handler(RequestValidationError)
    def _body_error(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(p) for p in err.get("loc", ())], "msg": err.get("msg", "")}
            for err in exc.errors()
        ]
        return JSONResponse(
            _envelope("validation", "request failed validation", detail),
            status_code=422,
        )

    @app.exception_handler(StarletteHTTPException)
    def _http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "not-found", 405: "method-not-allowed", 409: "conflict"}.get(
            exc.status_code, "http"
        )
        message = exc.detail if isinstance(exc.detail, str) else "request failed"
        return JSONResponse(_envelope(code, message), status_code=exc.status_code)

    def _dim_mismatch(dim: int, model: GeneratorModel) -> JSONResponse:
        return JSONResponse(
            _envelope(
                "validation",
                f"latent dim {dim} does not match model input dim {model.input_dim}",
            ),
            status_code=422,
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/api/models")
    def upload_model(file: UploadFile = File(...)):
        data = file.file.read()
        return state.register_model(data, file.filename or "model.lgw1")

    @app.get("/api/models")
    def list_models():
        return {"models": state.list_models()}

    @app.get("/api/models/{model_id}")
    def get_model(model_id: str):
        return model_info(state.get_model(model_id))

    @app.post("/api/sample")
    def sample(req: SampleRequest):
        model = state.get_model(req.model_id)
        zs = sample_latents(model.input_space, model.input_dim, req.count, req.seed)
        latent_ids = state.register_latents(list(zs))
        image_urls = [state.render(model, z)[1] for z in zs]
        return {"latent_ids": latent_ids, "image_urls": image_urls}

    @app.post("/api/traverse")
    def traverse(req: TraverseRequest):
        model = state.get_model(req.model_id)
        ep = req.endpoints
        if (ep.latent_ids is None) == (ep.seeds is None):
            raise ValidationError("endpoints needs exactly one of latent_ids or seeds")
        if ep.latent_ids is not None:
            a = state.resolve_latent(ep.latent_ids[0])
            b = state.resolve_latent(ep.latent_ids[1])
        else:
            (a,) = sample_latents(model.input_space, model.input_dim, 1, ep.seeds[0])
            (b,) = sample_latents(model.input_space, model.input_dim, 1, ep.seeds[1])
        if a.dim != model.input_dim:
            return _dim_mismatch(a.dim, model)
        if req.kind == "linear":
            seq = lerp(a, b, req.n)
        elif req.kind == "extrapolate":
            seq = extrapolate_two_sided(a, b, req.n)
        elif req.kind == "circular":
            seq = circular_interpolation(a, b, req.n, radius=req.radius)
        else:
            seq = slerp(a, b, req.n)
        rendered = [state.render(model, z) for z in seq.points]
        grid = compose_grid([img for img, _ in rendered], cols=req.grid_cols)
        return {
            "image_urls": [url for _, url in rendered],
            "grid_url": state.cache_png(encode_png_bytes(grid)),
        }

    @app.post("/api/arithmetic")
    def arithmetic(req: ArithmeticRequest):
        model = state.get_model(req.model_id)
        signed_sets = [
            (1 if t.sign == "+" else -1, state.store.get(t.anchor_set))
            for t in req.terms
        ]
        for _, aset in signed_sets:
            if aset.dim != model.input_dim:
                return _dim_mismatch(aset.dim, model)
        expr = ArithmeticExpression(terms=tuple(signed_sets))
        operand_means = [average_anchors(aset) for _, aset in signed_sets]
        result = evaluate_arithmetic(expr)
        (result_id,) = state.register_latents([result])
        return {
            "result_latent_id": result_id,
            "operand_image_urls": [state.render(model, m)[1] for m in operand_means],
            "result_image_url": state.render(model, result)[1],
        }

    @app.get("/api/latents/{latent_id}")
    def export_latent(latent_id: str):
        return {"latent_id": latent_id, "record": state.latent_record(latent_id)}

    @app.get("/api/anchors")
    def list_anchors(tag: list[str] = Query(default=[])):
        summaries = state.store.list(set(tag) if tag else None)
        return {
            "anchor_sets": [
                {
                    "name": s.name,
                    "tags": sorted(s.tags),
                    "size": s.size,
                    "created_at": s.created_at,
                }
                for s in summaries
            ]
        }

    @app.post("/api/anchors")
    def create_anchor(req: AnchorCreateRequest):
        members = tuple(state.resolve_latent(lid) for lid in req.latent_ids)
        aset = AnchorSet(
            name=req.name, attribute_tags=frozenset(req.tags), members=members
        )
        state.store.put(aset, overwrite=req.overwrite)
        return {"name": aset.name, "tags": sorted(aset.attribute_tags), "size": len(members)}

    @app.get("/api/anchors/{name}")
    def get_anchor(name: str):
        aset = state.store.get(name)
        return {
            "name": aset.name,
            "tags": sorted(aset.attribute_tags),
            "size": len(aset.members),
            "members": [serialize_latent(m) for m in aset.members],
        }

    @app.delete("/api/anchors/{name}")
    def delete_anchor(name: str):
        state.store.delete(name)
        return {"deleted": name}

    @app.get("/images/{name}")
    def get_image(name: str):
        if not _IMAGE_NAME.fullmatch(name) or not (state.images_dir / name).is_file():
            raise NotFoundError(f"no image {name!r}")
        return FileResponse(state.images_dir / name, media_type="image/png")

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="frontend")

    return app
