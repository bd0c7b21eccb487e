"""HTTP API for the explorer UI: uploads, embeddings, selections, forecasts.

Desk-scale by design: datasets live in an in-memory store (optionally
mirrored to a directory), responses carry full double precision, and every
computation is cached compute-once per parameter set so identical requests
return byte-identical bodies.
"""

from __future__ import annotations

import itertools
import json
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .kalman import forecast, kalman_filter, next_region_entry, region_from_dict
from .series import TimeSeries, inverse_scale, load_csv, minmax_scale
from .spectral import align_embeddings, decompose, pca_embed, subspace_embed
from .sysid import identify_output_only
from .trajectory import block_hankel, trajectory_matrix

__all__ = ["create_app", "SessionStore"]


class SessionStore:
    """Uploaded datasets plus compute-once caches keyed by request parameters."""

    def __init__(self, store_dir: str | None = None):
        self._lock = threading.Lock()
        self._datasets: dict[str, TimeSeries] = {}
        self._caches: dict[str, dict] = {}
        self._counter = itertools.count(1)
        self._store_dir = Path(store_dir) if store_dir else None
        if self._store_dir:
            self._store_dir.mkdir(parents=True, exist_ok=True)
            for csv_path in sorted(self._store_dir.glob("*.csv")):
                meta_path = csv_path.with_suffix(".json")
                meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
                with open(csv_path, "rb") as fh:
                    ts = load_csv(
                        fh,
                        has_header=meta.get("has_header", False),
                        timestamp_column=meta.get("timestamp_column"),
                    )
                self._register(csv_path.stem, ts)

    def _register(self, dataset_id: str, ts: TimeSeries) -> None:
        with self._lock:
            self._datasets[dataset_id] = ts
            self._caches[dataset_id] = {}
            # Keep the counter ahead of any persisted ids of the form ds-N.
            if dataset_id.startswith("ds-"):
                try:
                    n = int(dataset_id[3:])
                    self._counter = itertools.count(max(n + 1, next(self._counter)))
                except ValueError:
                    pass

    def add(self, raw: bytes, has_header: bool, timestamp_column) -> tuple[str, TimeSeries]:
        ts = load_csv(raw, has_header=has_header, timestamp_column=timestamp_column)
        with self._lock:
            dataset_id = f"ds-{next(self._counter)}"
            self._datasets[dataset_id] = ts
            self._caches[dataset_id] = {}
        if self._store_dir:
            (self._store_dir / f"{dataset_id}.csv").write_bytes(raw)
            (self._store_dir / f"{dataset_id}.json").write_text(
                json.dumps({"has_header": has_header, "timestamp_column": timestamp_column})
            )
        return dataset_id, ts

    def get(self, dataset_id: str) -> TimeSeries:
        with self._lock:
            ts = self._datasets.get(dataset_id)
        if ts is None:
            raise HTTPException(status_code=404, detail=f"unknown dataset id {dataset_id!r}")
        return ts

    def persist_model(self, dataset_id: str, L: int, rank, epsilon, model) -> None:
        """Mirror an identified model to the store directory, when one is set."""
        if not self._store_dir:
            return
        tag = f"{dataset_id}_L{L}_rank{rank if rank is not None else 'auto'}"
        if epsilon is not None:
            tag += f"_eps{epsilon}"
        (self._store_dir / f"{tag}.model.json").write_text(json.dumps(model.to_dict(), sort_keys=True))

    def cached(self, dataset_id: str, key: tuple, compute):
        """Compute-once per (dataset, key): concurrent identical requests share one run."""
        with self._lock:
            cache = self._caches[dataset_id]
            entry = cache.get(key)
            if entry is None:
                entry = {"event": threading.Event(), "value": None, "error": None}
                cache[key] = entry
                owner = True
            else:
                owner = False
        if owner:
            try:
                entry["value"] = compute()
            except BaseException as exc:  # propagate to all waiters
                entry["error"] = exc
                raise
            finally:
                entry["event"].set()
        else:
            entry["event"].wait()
            if entry["error"] is not None:
                raise entry["error"]
        return entry["value"]


def _merge_ranges(ranges: list[tuple[int, int]]) -> list[list[int]]:
    merged: list[list[int]] = []
    for start, end in sorted(ranges):
        if merged and start <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return merged


def create_app(store_dir: str | None = None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="timelens service", openapi_url="/spec")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(store_dir=store_dir)

    def _check_window(ts: TimeSeries, L: int) -> None:
        if L < 1 or L > ts.n_samples:
            raise HTTPException(status_code=422, detail=f"window length {L} invalid for series of length {ts.n_samples}")

    def _embedding_payload(dataset_id: str, L: int, rank, epsilon, method: str, center: bool, scale: bool) -> dict:
        ts = store.get(dataset_id)
        _check_window(ts, L)
        if rank is not None and epsilon is not None:
            raise HTTPException(status_code=422, detail="give at most one of rank and epsilon")

        def compute():
            series = minmax_scale(ts)[0] if scale else ts
            try:
                h = block_hankel(series, L)
                dec = decompose(h, rank=rank, epsilon=epsilon)
                if dec.rank_selected < 1:
                    raise ValueError("rank selection found no significant components")
                z = trajectory_matrix(series, L, 1)
                emb_tc = pca_embed(z, dec.rank_selected, center=center)
                emb_ss = subspace_embed(dec)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            residual = align_embeddings(emb_tc, emb_ss).residual
            return {
                "timecluster": emb_tc,
                "subspace": emb_ss,
                "singular_values": [float(s) for s in dec.singular_values],
                "alignment_residual": float(residual),
            }

        bundle = store.cached(dataset_id, ("embedding", L, rank, epsilon, center, scale), compute)
        emb = bundle["timecluster"] if method == "timecluster" else bundle["subspace"]
        payload = emb.to_dict()
        payload["source"] = "timecluster_pca" if method == "timecluster" else "hankel_svd"
        payload["window_start_indices"] = [int(i) for i in emb.window_start_indices()]
        payload["singular_values"] = bundle["singular_values"]
        payload["alignment_residual"] = bundle["alignment_residual"]
        return payload

    @app.post("/datasets")
    async def upload(request: Request, has_header: bool = False, timestamp_column: str | None = None):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload_field = next((v for v in form.values() if hasattr(v, "read")), None)
            if upload_field is None:
                raise HTTPException(status_code=400, detail="multipart upload must contain a file field")
            raw = await upload_field.read()
        else:
            raw = await request.body()
        if not raw:
            raise HTTPException(status_code=400, detail="empty upload body")
        col = None
        if timestamp_column is not None:
            col = int(timestamp_column) if timestamp_column.lstrip("-").isdigit() else timestamp_column
        try:
            dataset_id, ts = store.add(raw, has_header=has_header, timestamp_column=col)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"CSV parse failure: {exc}") from exc
        return {
            "id": dataset_id,
            "T": ts.n_samples,
            "D": ts.n_channels,
            "channel_names": list(ts.channel_names) if ts.channel_names else None,
        }

    @app.get("/datasets/{dataset_id}/embedding")
    def embedding(
        dataset_id: str,
        L: int = Query(...),
        rank: int | None = None,
        epsilon: float | None = None,
        method: str = "timecluster",
        center: bool = False,
        scale: bool = False,
    ):
        if method not in ("timecluster", "subspace"):
            raise HTTPException(status_code=422, detail=f"unknown method {method!r}")
        return JSONResponse(_embedding_payload(dataset_id, L, rank, epsilon, method, center, scale))

    @app.get("/datasets/{dataset_id}/trajectory")
    def trajectory(dataset_id: str, L: int = Query(...), s: int = 1, scale: bool = False):
        ts = store.get(dataset_id)
        _check_window(ts, L)
        if s < 1:
            raise HTTPException(status_code=422, detail="stride must be >= 1")

        def compute():
            series = minmax_scale(ts)[0] if scale else ts
            return trajectory_matrix(series, L, s).to_envelope()

        return JSONResponse(store.cached(dataset_id, ("trajectory", L, s, scale), compute))

    @app.post("/datasets/{dataset_id}/selection")
    async def selection(dataset_id: str, request: Request):
        ts = store.get(dataset_id)
        body = await request.json()
        L = body.get("L")
        if not isinstance(L, int):
            raise HTTPException(status_code=422, detail="selection body must carry integer L")
        _check_window(ts, L)
        W = ts.n_samples - L + 1
        has_windows = "window_indices" in body
        has_range = "time_range" in body
        if has_windows == has_range:
            raise HTTPException(status_code=422, detail="supply exactly one of window_indices and time_range")
        if has_windows:
            indices = body["window_indices"]
            if not isinstance(indices, list) or not all(isinstance(i, int) for i in indices):
                raise HTTPException(status_code=422, detail="window_indices must be a list of integers")
            if any(i < 0 or i >= W for i in indices):
                raise HTTPException(status_code=422, detail=f"window index out of range [0, {W})")
            ranges = [(i, i + L - 1) for i in indices]
            return {"time_ranges": _merge_ranges(ranges)}
        time_range = body["time_range"]
        if (
            not isinstance(time_range, list)
            or len(time_range) != 2
            or not all(isinstance(v, int) for v in time_range)
        ):
            raise HTTPException(status_code=422, detail="time_range must be [start, end] integers")
        start, end = time_range
        if start > end or start < 0 or end >= ts.n_samples:
            raise HTTPException(status_code=422, detail=f"time_range out of bounds [0, {ts.n_samples})")
        windows = [w for w in range(W) if w <= end and w + L - 1 >= start]
        return {"window_indices": windows}

    @app.post("/datasets/{dataset_id}/forecast")
    async def forecast_endpoint(dataset_id: str, request: Request):
        ts = store.get(dataset_id)
        body = await request.json()
        L = body.get("L")
        h = body.get("h")
        rank = body.get("rank")
        epsilon = body.get("epsilon")
        if not isinstance(L, int):
            raise HTTPException(status_code=422, detail="body must carry integer L")
        if not isinstance(h, int) or h < 1:
            raise HTTPException(status_code=422, detail="horizon h must be a positive integer")
        _check_window(ts, L)

        def compute():
            scaled, params = minmax_scale(ts)
            try:
                model, _, _ = identify_output_only(scaled, L, rank=rank, epsilon=epsilon)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            store.persist_model(dataset_id, L, rank, epsilon, model)
            filtered = kalman_filter(model, scaled.values)
            result = forecast(model, filtered[-1], h)
            span = params.maxima - params.minima
            outputs = inverse_scale(TimeSeries(result.predicted_outputs), params).values
            scale_outer = np.outer(span, span)
            covs = result.output_covariances * scale_outer[None, :, :]
            return {
                "horizon": h,
                "predicted_outputs": outputs.tolist(),
                "predicted_states": result.predicted_states.tolist(),
                "output_covariances": covs.tolist(),
            }

        return JSONResponse(store.cached(dataset_id, ("forecast", L, rank, epsilon, h), compute))

    @app.post("/datasets/{dataset_id}/region-query")
    async def region_query(dataset_id: str, request: Request):
        ts = store.get(dataset_id)
        body = await request.json()
        L = body.get("L")
        horizon = body.get("horizon")
        rank = body.get("rank")
        epsilon = body.get("epsilon")
        scale = bool(body.get("scale", False))
        if not isinstance(L, int):
            raise HTTPException(status_code=422, detail="body must carry integer L")
        if not isinstance(horizon, int) or horizon < 1:
            raise HTTPException(status_code=422, detail="horizon must be a positive integer")
        _check_window(ts, L)
        try:
            region = region_from_dict(body.get("region") or {})
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

        def compute():
            series = minmax_scale(ts)[0] if scale else ts
            try:
                model, _, _ = identify_output_only(series, L, rank=rank, epsilon=epsilon)
                filtered = kalman_filter(model, series.values)
                k = next_region_entry(model, filtered[-1], region, horizon)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            return {"steps_until_entry": k}

        key = ("region", L, rank, epsilon, scale, horizon, json.dumps(body.get("region"), sort_keys=True))
        return JSONResponse(store.cached(dataset_id, key, compute))

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
