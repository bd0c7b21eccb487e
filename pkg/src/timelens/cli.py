"""Batch command line: generate | embed | identify | smooth | forecast | compare | serve.

Every run writes a reproducibility manifest (resolved config + version) next
to its outputs; all randomness is surfaced through --seed, so identical
manifests produce identical output bytes. Figures are emitted as CSV/JSON
data for external plotting.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .kalman import forecast as kalman_forecast
from .kalman import kalman_filter, online_forecast_eval, rts_smooth
from .series import TimeSeries, detrend, load_csv, minmax_scale
from .spectral import (
    Embedding,
    align_embeddings,
    decompose,
    embedding_from_states,
    pca_embed,
    select_rank,
    subspace_embed,
)
from .statespace import StateSpaceModel
from .sysid import identify_output_only, identify_with_inputs
from .synth import gen_ar2, gen_double_periodic, gen_exogenous_stepped, gen_periodic_ssm
from .trajectory import block_hankel, trajectory_matrix

_FLOAT = repr  # shortest round-trip decimal, deterministic


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list[str] | None, rows) -> None:
    lines = []
    if header:
        lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_FLOAT(float(x)) if isinstance(x, (int, float, np.floating)) else str(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(outdir: Path, command: str, config: dict) -> None:
    _write_json(outdir / "manifest.json", {"command": command, "config": config, "version": __version__})


def _load_series(path: str, has_header: bool, timestamp_column: str | None) -> TimeSeries:
    col: int | str | None = None
    if timestamp_column is not None:
        col = int(timestamp_column) if timestamp_column.lstrip("-").isdigit() else timestamp_column
    with open(path, "rb") as fh:
        return load_csv(fh, has_header=has_header, timestamp_column=col)


def _preprocess(ts: TimeSeries, steps: str) -> TimeSeries:
    """Apply a comma-separated pipeline, e.g. 'detrend:linear,scale'."""
    for step in steps.split(","):
        step = step.strip()
        if step in ("", "none"):
            continue
        if step == "scale":
            ts, _ = minmax_scale(ts)
        elif step.startswith("detrend"):
            parts = step.split(":")
            method = parts[1] if len(parts) > 1 else "linear"
            degree = int(parts[2]) if len(parts) > 2 else None
            ts = detrend(ts, method=method, degree=degree)
        else:
            raise ValueError(f"unknown preprocessing step {step!r}")
    return ts


def _embedding_rows(emb: Embedding):
    starts = emb.window_start_indices()
    for i in range(emb.n_windows):
        yield [int(starts[i]), *emb.coords[i]]


def _write_embedding(outdir: Path, name: str, emb: Embedding, fmt: str) -> None:
    if fmt in ("csv", "both"):
        header = ["window_start_index"] + [f"c{j + 1}" for j in range(emb.rank)]
        _write_csv(outdir / f"{name}.csv", header, _embedding_rows(emb))
    if fmt in ("json", "both"):
        _write_json(outdir / f"{name}.json", emb.to_dict())


def _read_embedding(path: str) -> Embedding:
    p = Path(path)
    if p.suffix == ".json":
        payload = json.loads(p.read_text())
        return Embedding(
            coords=np.asarray(payload["coords"], dtype=float),
            source=payload.get("source", "unknown"),
            window_length=int(payload.get("L", 1)),
        )
    rows = [line.split(",") for line in p.read_text().strip().splitlines()]
    if rows and rows[0][0] == "window_start_index":
        rows = rows[1:]
    coords = np.array([[float(x) for x in row[1:]] for row in rows])
    return Embedding(coords=coords, source="file", window_length=1)


def _config_from_args(args: argparse.Namespace, keys: list[str]) -> dict:
    return {k: getattr(args, k) for k in keys}


def cmd_generate(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.kind == "ar2":
        out = gen_ar2(args.phi1, args.phi2, noise_sd=args.noise_sd, T=args.length, seed=args.seed)
    elif args.kind == "double-periodic":
        out = gen_double_periodic(T=args.length, f1=args.f1, f2=args.f2, noise_sd=args.noise_sd, seed=args.seed)
    elif args.kind == "periodic-ssm":
        out = gen_periodic_ssm(theta=args.theta, q_sd=args.q_sd, r_sd=args.noise_sd, T=args.length, seed=args.seed)
    else:
        schedule = []
        for seg in args.schedule.split(";"):
            a, b, v = seg.split(":")
            schedule.append((int(a), int(b), float(v)))
        out = gen_exogenous_stepped(schedule, T=args.length, noise_sd=args.noise_sd, seed=args.seed)
    _write_csv(outdir / "series.csv", None, out.series.values)
    if out.true_states is not None:
        _write_csv(outdir / "states.csv", None, out.true_states.T)
    if out.inputs is not None:
        _write_csv(outdir / "inputs.csv", None, out.inputs.values)
    _write_json(outdir / "spec.json", out.spec)
    _write_manifest(outdir, "generate", out.spec)
    return 0


def cmd_embed(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    ts = _preprocess(_load_series(args.input, args.has_header, args.timestamp_column), args.preprocess)
    if args.method == "subspace" and args.stride != 1:
        raise ValueError("subspace method requires stride 1; strided matrices are not Hankel")
    z = trajectory_matrix(ts, args.window, args.stride)

    if args.stride == 1:
        h = block_hankel(ts, args.window)
        dec = decompose(h, rank=args.rank, epsilon=args.epsilon)
        singular_values = dec.singular_values
        r = dec.rank_selected
    else:
        singular_values = np.linalg.svd(z.data, compute_uv=False)
        r = args.rank if args.rank is not None else select_rank(singular_values, args.epsilon or 1e-2)
        dec = None
    if r < 1:
        raise ValueError("rank selection found no significant components")

    emb_tc = pca_embed(z, r, center=args.center)
    if args.method == "timecluster":
        emb = emb_tc
    else:
        emb = subspace_embed(dec)
    _write_embedding(outdir, "embedding", emb, args.format)

    scree = [[i + 1, s] for i, s in enumerate(singular_values)]
    if args.format in ("csv", "both"):
        _write_csv(outdir / "singular_values.csv", ["index", "sigma"], scree)
    if args.format in ("json", "both"):
        _write_json(outdir / "singular_values.json", {"singular_values": [float(s) for s in singular_values]})

    _write_csv(outdir / "trajectory.csv", None, z.data)
    if args.format in ("json", "both"):
        _write_json(outdir / "trajectory.json", z.to_envelope())

    if dec is not None:
        report = align_embeddings(pca_embed(z, r, center=False), subspace_embed(dec))
        _write_json(
            outdir / "comparison.json",
            {
                "residual": report.residual,
                "rotation": report.rotation.tolist(),
                "translation": report.translation.tolist(),
                "methods": ["timecluster", "subspace"],
            },
        )

    _write_manifest(
        outdir,
        "embed",
        _config_from_args(args, ["input", "window", "stride", "rank", "epsilon", "center", "method", "preprocess", "format"]),
    )
    return 0


def cmd_identify(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    ts = _preprocess(_load_series(args.input, args.has_header, args.timestamp_column), args.preprocess)
    if args.inputs:
        u = _load_series(args.inputs, args.has_header, None)
        model, states = identify_with_inputs(ts, u, args.window, rank=args.rank, epsilon=args.epsilon)
    else:
        model, states, dec = identify_output_only(ts, args.window, rank=args.rank, epsilon=args.epsilon)
        if args.format in ("csv", "both"):
            _write_csv(outdir / "singular_values.csv", ["index", "sigma"], [[i + 1, s] for i, s in enumerate(dec.singular_values)])
    _write_json(outdir / "model.json", model.to_dict())
    _write_csv(outdir / "states.csv", None, states.states.T)
    _write_manifest(
        outdir,
        "identify",
        _config_from_args(args, ["input", "inputs", "window", "rank", "epsilon", "preprocess", "format"]),
    )
    return 0


def cmd_smooth(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    ts = _preprocess(_load_series(args.input, args.has_header, args.timestamp_column), args.preprocess)
    model, states, _ = identify_output_only(ts, args.window, rank=args.rank, epsilon=args.epsilon)
    filtered = kalman_filter(model, ts.values[: states.n_windows])
    smoothed = rts_smooth(model, filtered, window_length=args.window)
    _write_embedding(outdir, "smoothed", embedding_from_states(smoothed, source="smoothed"), args.format)
    _write_manifest(
        outdir,
        "smooth",
        _config_from_args(args, ["input", "window", "rank", "epsilon", "preprocess", "format"]),
    )
    return 0


def cmd_forecast(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {args.horizon}")
    ts = _preprocess(_load_series(args.input, args.has_header, args.timestamp_column), args.preprocess)
    if args.model:
        model = StateSpaceModel.from_dict(json.loads(Path(args.model).read_text()))
    else:
        model, _, _ = identify_output_only(ts, args.window, rank=args.rank, epsilon=args.epsilon)
    filtered = kalman_filter(model, ts.values)
    result = kalman_forecast(model, filtered[-1], args.horizon)

    d = result.predicted_outputs.shape[1]
    header = ["step"] + [f"y_hat_{j + 1}" for j in range(d)] + [f"var_{j + 1}" for j in range(d)]
    rows = [
        [k + 1, *result.predicted_outputs[k], *np.diag(result.output_covariances[k])]
        for k in range(result.horizon)
    ]
    if args.format in ("csv", "both"):
        _write_csv(outdir / "forecast.csv", header, rows)
    if args.format in ("json", "both"):
        _write_json(outdir / "forecast.json", result.to_dict())

    metrics = {"horizon": args.horizon, "model_n": model.n}
    if args.eval:
        start = args.start if args.start is not None else ts.n_samples * 3 // 4
        eval_result = online_forecast_eval(
            ts, start=start, L=args.window, rank=args.rank, epsilon=args.epsilon, refit_every=args.refit_every
        )
        metrics["one_step_ahead"] = eval_result.to_dict()
    _write_json(outdir / "metrics.json", metrics)
    _write_manifest(
        outdir,
        "forecast",
        _config_from_args(
            args,
            ["input", "window", "rank", "epsilon", "horizon", "model", "eval", "start", "refit_every", "preprocess", "format"],
        ),
    )
    return 0


def cmd_compare(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.a and args.b:
        emb_a = _read_embedding(args.a)
        emb_b = _read_embedding(args.b)
        config = {"a": args.a, "b": args.b}
    elif args.input:
        ts = _preprocess(_load_series(args.input, args.has_header, args.timestamp_column), args.preprocess)
        h = block_hankel(ts, args.window)
        dec = decompose(h, rank=args.rank, epsilon=args.epsilon)
        if dec.rank_selected < 1:
            raise ValueError("rank selection found no significant components")
        z = trajectory_matrix(ts, args.window, 1)
        emb_a = pca_embed(z, dec.rank_selected, center=args.center)
        emb_b = subspace_embed(dec)
        config = _config_from_args(args, ["input", "window", "rank", "epsilon", "center", "preprocess"])
    else:
        raise FileNotFoundError("compare needs either --input or both --a and --b")
    report = align_embeddings(emb_a, emb_b)
    _write_json(
        outdir / "alignment.json",
        {
            "residual": report.residual,
            "rotation": report.rotation.tolist(),
            "translation": report.translation.tolist(),
        },
    )
    _write_manifest(outdir, "compare", config)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store_dir=args.store_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_common(p: argparse.ArgumentParser, with_rank: bool = True) -> None:
    p.add_argument("--input", required=True, help="input series CSV")
    p.add_argument("--has-header", action="store_true", help="first CSV row holds channel names")
    p.add_argument("--timestamp-column", default=None, help="timestamp column name or 0-based index")
    p.add_argument("--window", "-L", type=int, required=True, help="window length L")
    p.add_argument("--preprocess", default="none", help="comma list: none | scale | detrend[:method[:degree]]")
    p.add_argument("--format", choices=["csv", "json", "both"], default="both")
    p.add_argument("--output-dir", default="timelens-out")
    if with_rank:
        group = p.add_mutually_exclusive_group()
        group.add_argument("--rank", type=int, default=None, help="fixed number of components")
        group.add_argument("--epsilon", type=float, default=None, help="relative singular-value threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timelens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset with its ground truth")
    g.add_argument("--kind", choices=["ar2", "double-periodic", "periodic-ssm", "exogenous-stepped"], required=True)
    g.add_argument("--length", "-T", type=int, default=500)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise-sd", type=float, default=0.0)
    g.add_argument("--phi1", type=float, default=1.5)
    g.add_argument("--phi2", type=float, default=-0.9)
    g.add_argument("--f1", type=float, default=1 / 3)
    g.add_argument("--f2", type=float, default=1 / 5)
    g.add_argument("--theta", type=float, default=0.3)
    g.add_argument("--q-sd", type=float, default=0.0)
    g.add_argument("--schedule", default="0:250:0.0;250:500:1.0", help="start:end:level segments joined by ';'")
    g.add_argument("--output-dir", default="timelens-out")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("embed", help="window embedding plus scree data")
    _add_common(e)
    e.add_argument("--stride", type=int, default=1)
    e.add_argument("--center", action="store_true", help="mean-subtract windows before PCA")
    e.add_argument("--method", choices=["timecluster", "subspace"], default="timecluster")
    e.set_defaults(func=cmd_embed)

    i = sub.add_parser("identify", help="recover a state-space model")
    _add_common(i)
    i.add_argument("--inputs", default=None, help="exogenous input CSV")
    i.set_defaults(func=cmd_identify)

    s = sub.add_parser("smooth", help="Kalman-smoothed embedding")
    _add_common(s)
    s.set_defaults(func=cmd_smooth)

    f = sub.add_parser("forecast", help="h-step forecast and optional walk-forward eval")
    _add_common(f)
    f.add_argument("--horizon", "-H", type=int, required=True)
    f.add_argument("--model", default=None, help="forecast with a saved model.json instead of re-identifying")
    f.add_argument("--eval", action="store_true", help="also run one-step-ahead evaluation")
    f.add_argument("--start", type=int, default=None)
    f.add_argument("--refit-every", type=int, default=1)
    f.set_defaults(func=cmd_forecast)

    c = sub.add_parser("compare", help="Procrustes-align two embeddings")
    c.add_argument("--input", default=None, help="series CSV: compare both methods on it")
    c.add_argument("--has-header", action="store_true")
    c.add_argument("--timestamp-column", default=None)
    c.add_argument("--window", "-L", type=int, default=None)
    c.add_argument("--preprocess", default="none")
    c.add_argument("--center", action="store_true")
    group = c.add_mutually_exclusive_group()
    group.add_argument("--rank", type=int, default=None)
    group.add_argument("--epsilon", type=float, default=None)
    c.add_argument("--a", default=None, help="first embedding file (csv or json)")
    c.add_argument("--b", default=None, help="second embedding file (csv or json)")
    c.add_argument("--output-dir", default="timelens-out")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("serve", help="run the HTTP service")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8000)
    v.add_argument("--store-dir", default=None, help="persist uploads and models here")
    v.add_argument("--ui-dir", default=None, help="static explorer assets to serve")
    v.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "input", None) and not Path(args.input).exists():
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return 2
    if getattr(args, "inputs", None) and not Path(args.inputs).exists():
        print(f"error: inputs file not found: {args.inputs}", file=sys.stderr)
        return 2
    if getattr(args, "model", None) and not Path(args.model).exists():
        print(f"error: model file not found: {args.model}", file=sys.stderr)
        return 2
    if getattr(args, "command", None) == "compare":
        for attr in ("a", "b"):
            path = getattr(args, attr)
            if path and not Path(path).exists():
                print(f"error: embedding file not found: {path}", file=sys.stderr)
                return 2
        if args.input and args.window is None:
            print("error: compare --input requires --window/-L", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
