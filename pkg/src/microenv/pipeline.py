"""Batch pipeline stages and the run manifest.

Each stage writes its artifacts into the configured output directory and
records shapes plus content hashes in manifest.json. The manifest carries the
full configuration, so replaying it reproduces every artifact byte-for-byte;
a failed stage leaves partial outputs in place and marks the manifest FAILED.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import analytics
from .assemble import NeighborhoodMatrix, assemble
from .cluster import ClusterModel, kmeans
from .config import PipelineConfig
from .data import (
    CellTable,
    Matrix,
    load_cells_csv,
    read_matrix_csv,
    write_cells_csv,
    write_matrix_csv,
)
from .embedding import EmbeddingResult, embed
from .graphstats import default_registry, network_matrix
from .neighbors import build_index
from .pca import fit_pca, pca_transform
from .quantiles import quantile_matrix
from .sim import SimulationParams, neighborhood_quantile_block, simulate

MANIFEST = "manifest.json"

CELLS_CSV = "cells.csv"
QUANTILE_CSV = "quantile_block.csv"
NETWORK_CSV = "network_block.csv"
NEIGHBORHOOD_CSV = "neighborhood_matrix.csv"
NEIGHBORHOOD_META = "neighborhood_matrix.meta.json"
EMBEDDING_CSV = "embedding.csv"
CLUSTERS_CSV = "clusters.csv"
SUMMARIES_JSON = "summaries.json"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _load_manifest(out: Path) -> dict:
    path = out / MANIFEST
    if path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    return {"config": None, "status": "OK", "error": None, "stages": {}}


def _write_manifest(out: Path, manifest: dict) -> None:
    (out / MANIFEST).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _record_stage(out: Path, config: PipelineConfig, stage: str, shapes: dict, files: list[str]):
    manifest = _load_manifest(out)
    manifest["config"] = config.to_dict()
    manifest["status"] = "OK"
    manifest["error"] = None
    manifest["stages"][stage] = {
        "status": "OK",
        "shapes": shapes,
        "hashes": {f: _sha256(out / f) for f in files},
    }
    _write_manifest(out, manifest)


def _record_failure(out: Path, config: PipelineConfig, stage: str, err: Exception):
    out.mkdir(parents=True, exist_ok=True)
    manifest = _load_manifest(out)
    manifest["config"] = config.to_dict()
    manifest["status"] = "FAILED"
    manifest["error"] = f"{stage}: {err}"
    manifest["stages"][stage] = {"status": "FAILED", "error": str(err)}
    _write_manifest(out, manifest)


def stage_featurize(config: PipelineConfig, table: CellTable | None = None) -> dict:
    """Cells -> PCA -> quantile + network blocks -> assembled neighborhood matrix."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if table is None:
            table = load_cells_csv(config.input.path, config.input.schema())
        write_cells_csv(table, out / CELLS_CSV)

        model = fit_pca(
            table.expression_matrix(),
            config.pca.variance_target,
            standardize=config.pca.standardize,
        )
        reduced = pca_transform(model, table.expression_matrix())

        index = build_index(table.coords)
        qblock = quantile_matrix(
            reduced,
            index,
            radius=config.neighborhood.radius,
            k_max=config.neighborhood.k_max,
            spec=config.quantiles.spec(),
        )
        registry = default_registry(
            decay_delta=config.network.decay_delta,
            kpath_k=config.network.kpath_k,
            include=list(config.network.statistics) if config.network.statistics else None,
        )
        nblock = network_matrix(
            table.coords,
            index,
            radius=config.neighborhood.radius,
            k_max=config.neighborhood.k_max,
            edge_threshold=config.network.edge_threshold,
            registry=registry,
            aggregate=config.network.aggregate,
        )
        combined = assemble(
            [qblock, nblock], [config.assembly.quantile_mode, config.assembly.network_mode]
        )

        write_matrix_csv(qblock.matrix, out / QUANTILE_CSV, ids=table.ids)
        write_matrix_csv(nblock.matrix, out / NETWORK_CSV, ids=table.ids)
        write_matrix_csv(combined.matrix, out / NEIGHBORHOOD_CSV, ids=table.ids)
        _write_block_meta(out / NEIGHBORHOOD_META, combined)

        shapes = {
            "cells": [table.n, table.d],
            "pca_components": model.n_components,
            "quantile_block": list(qblock.values.shape),
            "network_block": list(nblock.values.shape),
            "neighborhood_matrix": list(combined.values.shape),
        }
        _record_stage(
            out,
            config,
            "featurize",
            shapes,
            [CELLS_CSV, QUANTILE_CSV, NETWORK_CSV, NEIGHBORHOOD_CSV, NEIGHBORHOOD_META],
        )
        return shapes
    except Exception as err:
        _record_failure(out, config, "featurize", err)
        raise


def stage_simulate(config: PipelineConfig, params: SimulationParams) -> dict:
    """Generate the synthetic tissue and its neighborhood quantile matrix."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        table = simulate(params)
        write_cells_csv(table, out / CELLS_CSV)
        block = neighborhood_quantile_block(table, params)
        combined = assemble([block], ["none"])
        write_matrix_csv(combined.matrix, out / NEIGHBORHOOD_CSV, ids=table.ids)
        _write_block_meta(out / NEIGHBORHOOD_META, combined)
        shapes = {
            "cells": [table.n, table.d],
            "neighborhood_matrix": list(combined.values.shape),
        }
        _record_stage(
            out, config, "simulate", shapes, [CELLS_CSV, NEIGHBORHOOD_CSV, NEIGHBORHOOD_META]
        )
        return shapes
    except Exception as err:
        _record_failure(out, config, "simulate", err)
        raise


def stage_embed(config: PipelineConfig) -> dict:
    out = Path(config.output_dir)
    try:
        matrix, ids = read_matrix_csv(out / NEIGHBORHOOD_CSV, has_ids=True)
        result = embed(matrix, config.embedding.params())
        write_matrix_csv(Matrix(result.coords, ("x", "y")), out / EMBEDDING_CSV, ids=ids)
        shapes = {"embedding": list(result.coords.shape)}
        _record_stage(out, config, "embed", shapes, [EMBEDDING_CSV])
        return shapes
    except Exception as err:
        _record_failure(out, config, "embed", err)
        raise


def stage_cluster(config: PipelineConfig) -> dict:
    out = Path(config.output_dir)
    try:
        matrix, ids = read_matrix_csv(out / EMBEDDING_CSV, has_ids=True)
        model = kmeans(matrix.values, config.cluster.k, seed=config.cluster.seed)
        _write_clusters_csv(out / CLUSTERS_CSV, ids, model)

        table = load_cells_table(out)
        summary = analytics.build_cluster_summary(
            table.expression, table.feature_names, model.assignments, table.cell_types
        )
        (out / SUMMARIES_JSON).write_text(_summaries_json(summary, model), encoding="utf-8")
        shapes = {"clusters": [len(ids or []), 1], "k": model.k}
        _record_stage(out, config, "cluster", shapes, [CLUSTERS_CSV, SUMMARIES_JSON])
        return shapes
    except Exception as err:
        _record_failure(out, config, "cluster", err)
        raise


def run_pipeline(config: PipelineConfig, table: CellTable | None = None) -> Path:
    """featurize -> embed -> cluster; returns the artifact directory."""
    stage_featurize(config, table=table)
    stage_embed(config)
    stage_cluster(config)
    return Path(config.output_dir)


def load_cells_table(out: Path) -> CellTable:
    from .data import ColumnSchema

    with (out / CELLS_CSV).open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
    import csv as _csv

    cols = next(_csv.reader([header]))
    schema = ColumnSchema(
        id="id", x="x", y="y", cell_type="cell_type", expression=tuple(cols[4:])
    )
    return load_cells_csv(out / CELLS_CSV, schema)


def load_embedding(out: Path, config: PipelineConfig) -> tuple[EmbeddingResult, tuple[str, ...]]:
    matrix, ids = read_matrix_csv(out / EMBEDDING_CSV, has_ids=True)
    return (
        EmbeddingResult(
            coords=matrix.values,
            params=config.embedding.params(),
            reducer_id=config.embedding.reducer,
        ),
        ids,
    )


def load_clusters(out: Path) -> tuple[np.ndarray, tuple[str, ...]]:
    matrix, ids = read_matrix_csv(out / CLUSTERS_CSV, has_ids=True)
    return matrix.values[:, 0].astype(int), ids


def _write_clusters_csv(path: Path, ids, model: ClusterModel) -> None:
    import csv as _csv

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["id", "cluster"])
        for rid, label in zip(ids, model.assignments):
            writer.writerow([rid, int(label)])


def _write_block_meta(path: Path, combined: NeighborhoodMatrix) -> None:
    meta = {
        "blocks": [
            {
                "name": b.name,
                "mode": b.mode,
                "start": b.start,
                "stop": b.stop,
                "zero_variance_columns": np.flatnonzero(b.zero_variance).tolist(),
            }
            for b in combined.blocks
        ]
    }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _summaries_json(summary: analytics.ClusterSummary, model: ClusterModel) -> str:
    payload = {
        "k": model.k,
        "inertia": model.inertia,
        "clusters": [
            {
                "cluster": int(c),
                "count": int(summary.counts[i]),
                "composition": {
                    t: float(summary.composition[i, j])
                    for j, t in enumerate(summary.type_names)
                },
                "medians": {
                    f: float(summary.medians[i, j])
                    for j, f in enumerate(summary.feature_names)
                },
            }
            for i, c in enumerate(summary.clusters)
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
