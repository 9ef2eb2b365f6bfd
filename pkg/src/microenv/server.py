"""Local HTTP API over pipeline artifacts for the interactive explorer.

One dataset per process. Reads are served from an immutable snapshot; the
only mutating request is POST /recluster, serialized through a single writer
lock and bumping the session version. Every response echoes the version it
was computed against. Numbers round-trip exactly: JSON floats are emitted
with shortest-repr precision (>= 12 significant digits).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import analytics
from .cluster import ClusterModel, kmeans
from .config import PipelineConfig
from .data import CellTable
from .embedding import EmbeddingResult
from .errors import MicroenvError
from .pipeline import load_cells_table, load_embedding


class ApiError(Exception):
    def __init__(self, code: str, message: str, status: int = 400, **extra):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status
        self.extra = extra


@dataclass
class SessionState:
    """Loaded artifacts plus the mutable clustering state."""

    table: CellTable
    embedding: EmbeddingResult
    seed: int
    model: ClusterModel
    version: int = 1
    filters: dict = field(default_factory=lambda: {"cell_types": None, "clusters": None})
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def from_artifacts(cls, artifact_dir: str | Path, config: PipelineConfig) -> "SessionState":
        out = Path(artifact_dir)
        table = load_cells_table(out)
        embedding, ids = load_embedding(out, config)
        if ids != table.ids:
            raise MicroenvError("embedding ids do not match cells.csv ids")
        seed = config.cluster.seed
        model = kmeans(embedding, config.cluster.k, seed=seed)
        return cls(table=table, embedding=embedding, seed=seed, model=model)

    def recluster(self, k: int) -> tuple[ClusterModel, int]:
        with self._lock:
            model = kmeans(self.embedding, k, seed=self.seed)
            self.model = model
            self.version += 1
            return model, self.version

    def snapshot(self) -> tuple[ClusterModel, int]:
        return self.model, self.version


def create_app(session: SessionState | None = None, static_dir: str | Path | None = None) -> FastAPI:
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="microenv session API")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.session = session

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        body = {"error": {"code": exc.code, "message": exc.message, **exc.extra}}
        return JSONResponse(status_code=exc.status, content=body)

    def need_session() -> SessionState:
        if app.state.session is None:
            raise ApiError("NO_SESSION", "no dataset loaded in this server", status=409)
        return app.state.session

    @app.get("/meta")
    def meta():
        s = need_session()
        model, version = s.snapshot()
        return {
            "version": version,
            "n": s.table.n,
            "k": model.k,
            "feature_names": list(s.table.feature_names),
            "cell_types": sorted(set(s.table.cell_types)),
            "seed": s.seed,
        }

    @app.get("/points")
    def points():
        s = need_session()
        model, version = s.snapshot()
        coords = s.table.coords
        emb = s.embedding.coords
        records = [
            {
                "id": s.table.ids[i],
                "spatial_x": float(coords[i, 0]),
                "spatial_y": float(coords[i, 1]),
                "embedding_x": float(emb[i, 0]),
                "embedding_y": float(emb[i, 1]),
                "cell_type": s.table.cell_types[i],
                "cluster": int(model.assignments[i]),
            }
            for i in range(s.table.n)
        ]
        return {"version": version, "points": records}

    @app.get("/expression")
    def expression(feature: str):
        s = need_session()
        _, version = s.snapshot()
        if feature not in s.table.feature_names:
            raise ApiError("UNKNOWN_FEATURE", f"no such feature: {feature!r}")
        j = s.table.feature_names.index(feature)
        return {
            "version": version,
            "feature": feature,
            "values": [float(v) for v in s.table.expression[:, j]],
        }

    @app.post("/recluster")
    async def recluster(request: Request):
        s = need_session()
        body = await request.json()
        k = body.get("k")
        if not isinstance(k, int) or isinstance(k, bool):
            raise ApiError("K_OUT_OF_RANGE", "k must be an integer", min=1, max=s.table.n)
        if not 1 <= k <= s.table.n:
            raise ApiError(
                "K_OUT_OF_RANGE",
                f"k must be between 1 and {s.table.n}",
                min=1,
                max=s.table.n,
            )
        model, version = s.recluster(k)
        return {
            "version": version,
            "k": model.k,
            "assignments": [int(a) for a in model.assignments],
            "sizes": [int(c) for c in model.sizes()],
        }

    @app.get("/summaries")
    def summaries(
        clusters: str = "",
        cell_types: str = "",
        top_n: int = 10,
        feature: str | None = None,
        bins: int = analytics.DEFAULT_BINS,
    ):
        s = need_session()
        model, version = s.snapshot()
        selected_clusters = _parse_int_list(clusters) or sorted(
            int(c) for c in np.unique(model.assignments)
        )
        selected_types = _parse_str_list(cell_types) or sorted(set(s.table.cell_types))

        types_arr = np.asarray(s.table.cell_types)
        mask = np.isin(model.assignments, selected_clusters) & np.isin(
            types_arr, selected_types
        )
        if not mask.any():
            raise ApiError("EMPTY_SELECTION", "no cells match the requested filters")

        idx = np.flatnonzero(mask)
        present = sorted(int(c) for c in np.unique(model.assignments[idx]))
        if len(present) < 2:
            raise ApiError(
                "NEED_TWO_CLUSTERS", "select at least two clusters with surviving cells"
            )

        summary = analytics.build_cluster_summary(
            s.table.expression[idx],
            s.table.feature_names,
            model.assignments[idx],
            tuple(types_arr[idx].tolist()),
            bins=bins,
        )
        heatmap = [
            {"feature": f.name, "spread": f.spread, "medians": {str(c): v for c, v in f.medians.items()}}
            for f in analytics.top_differential_features(summary, present, top_n)
        ]
        structure = {
            str(int(c)): {
                t: float(summary.composition[i, j])
                for j, t in enumerate(summary.type_names)
            }
            for i, c in enumerate(summary.clusters)
        }
        histogram = None
        if feature is not None:
            if feature not in s.table.feature_names:
                raise ApiError("UNKNOWN_FEATURE", f"no such feature: {feature!r}")
            j = s.table.feature_names.index(feature)
            edges = analytics._shared_edges(s.table.expression[idx, j], bins)
            per_cluster = {}
            for c in present:
                values = s.table.expression[idx][model.assignments[idx] == c, j]
                counts, _ = np.histogram(values, bins=edges)
                per_cluster[str(c)] = [int(v) for v in counts]
            histogram = {
                "feature": feature,
                "edges": [float(e) for e in edges],
                "counts": per_cluster,
            }

        return {
            "version": version,
            "clusters": present,
            "cell_types": selected_types,
            "heatmap": heatmap,
            "structure": structure,
            "histogram": histogram,
        }

    return app


def _parse_int_list(raw: str) -> list[int]:
    raw = (raw or "").strip()
    if not raw:
        return []
    try:
        return [int(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError:
        raise ApiError("BAD_FILTER", f"cluster filter must be integers, got {raw!r}")


def _parse_str_list(raw: str) -> list[str]:
    raw = (raw or "").strip()
    if not raw:
        return []
    return [tok for tok in raw.split(",") if tok != ""]


def serve(
    artifact_dir: str | Path,
    config: PipelineConfig,
    host: str = "127.0.0.1",
    port: int = 8040,
    static_dir: str | Path | None = None,
):
    import uvicorn

    session = SessionState.from_artifacts(artifact_dir, config)
    app = create_app(session)
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="warning")
