"""Command-line entry points: segment, area, inspect-weights, bench, serve, seed-demo.

Exit codes: 0 on success, 2 for usage errors (bad flags), 1 for runtime
failures. Every command accepts ``--json`` for machine-readable output; JSON
output is sorted and free of timing fields so it is byte-stable for a fixed
input and model.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from .errors import TelewoundError
from .imaging import load_image, load_mask_png, save_image, save_mask_png
from .model import load_model, read_manifest
from .pipeline import (
    CropRect,
    SegmentationParams,
    SegmentationResult,
    extract_components,
    live_loop,
    render_overlay,
    segment,
)
from .sizing import ReferenceAnnotation, calibrate_scale, estimate_area

MODE_NAMES = {"basic": "basic", "posteriori": "a_posteriori", "live": "live"}
FRAME_SUFFIXES = {".png", ".jpg", ".jpeg"}


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _fail(code: str, detail: str, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps({"error": code, "detail": detail}, sort_keys=True), err=True)
    else:
        click.echo(f"error: {detail}", err=True)
    sys.exit(1)


def _guarded(fn, as_json: bool):
    try:
        fn()
    except TelewoundError as exc:
        _fail(exc.code, str(exc), as_json)
    except OSError as exc:
        _fail("io_error", str(exc), as_json)


@click.group()
@click.version_option(package_name="telewound")
def main():
    """Wound segmentation, sizing, and telehealth service tools."""


@main.command("segment")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Weight file (.waiw).")
@click.option("--image", "image_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Input photo (PNG/JPEG).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Output mask PNG (0/255).")
@click.option("--overlay", "overlay_path", type=click.Path(dir_okay=False),
              help="Optional boundary overlay PNG rendered on the source photo.")
@click.option("--threshold", default=0.75, show_default=True,
              help="Probability cut, inclusive.")
@click.option("--mode", type=click.Choice(sorted(MODE_NAMES)), default="posteriori",
              show_default=True, help="Feedback mode; 'basic' renders no overlay.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def segment_command(model_path, image_path, out_path, overlay_path, threshold, mode, as_json):
    """Segment one wound photo into a binary mask."""

    def run():
        model = load_model(model_path)
        image = load_image(image_path)
        params = SegmentationParams(threshold=threshold, feedback_mode=MODE_NAMES[mode])
        result = segment(model, image, params)
        save_mask_png(result.mask, out_path)
        if overlay_path:
            save_image(render_overlay(image, result, params.feedback_mode), overlay_path)
        payload = {
            "image": str(image_path),
            "mask": str(out_path),
            "overlay": str(overlay_path) if overlay_path else None,
            "mode": params.feedback_mode,
            "threshold": threshold,
            "crop_rect": result.crop_rect.as_dict(),
            "wound_px": int(result.mask.sum()),
            "components": [c.as_dict() for c in result.components],
        }
        if as_json:
            _echo_json(payload)
        else:
            click.echo(f"mask -> {out_path}")
            if overlay_path:
                click.echo(f"overlay -> {overlay_path}")
            click.echo(f"{len(result.components)} component(s), {payload['wound_px']} wound px")
        click.echo(f"latency: {result.latency_ms:.1f} ms", err=True)

    _guarded(run, as_json)


def _parse_ro_spec(spec: str) -> ReferenceAnnotation:
    parts = spec.split(",")
    if len(parts) != 5:
        raise click.UsageError("--ro expects ax,ay,bx,by,known_length_mm")
    try:
        ax, ay, bx, by, mm = (float(p) for p in parts)
    except ValueError:
        raise click.UsageError(f"--ro values must be numbers, got {spec!r}") from None
    return ReferenceAnnotation(ax=ax, ay=ay, bx=bx, by=by, known_length_mm=mm)


@main.command("area")
@click.option("--mask", "mask_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Mask PNG to measure.")
@click.option("--ro", "ro_spec", default=None,
              help="Reference object: ax,ay,bx,by,known_length_mm (mask pixel coords).")
@click.option("--scale-mm-per-px", "scale", type=float, default=None,
              help="Precomputed scale instead of --ro.")
@click.option("--min-component-px", default=1, show_default=True,
              help="Drop components smaller than this.")
@click.option("--connectivity", type=click.Choice(["4", "8"]), default="8", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def area_command(mask_path, ro_spec, scale, min_component_px, connectivity, as_json):
    """Physical wound area of a mask, calibrated by a reference object or scale."""
    if (ro_spec is None) == (scale is None):
        raise click.UsageError("provide exactly one of --ro or --scale-mm-per-px")

    def run():
        mask = load_mask_png(mask_path)
        mm_per_px = calibrate_scale(_parse_ro_spec(ro_spec)) if ro_spec else scale
        params = SegmentationParams(
            min_component_px=min_component_px, connectivity=int(connectivity)
        )
        components = extract_components(mask, params)
        h, w = mask.shape
        result = SegmentationResult(
            prob_map=mask.astype(np.float32), mask=mask, components=components,
            crop_rect=CropRect(0.0, 0.0, float(w), float(h)), latency_ms=0.0,
        )
        size = estimate_area(result, mm_per_px)
        payload = {
            "mask": str(mask_path),
            "scale_mm_per_px": size.scale_mm_per_px,
            "wound_px": int(sum(c.pixel_count for c in components)),
            "component_mm2": list(size.component_mm2),
            "total_mm2": size.total_mm2,
            "total_cm2": size.total_cm2,
        }
        if as_json:
            _echo_json(payload)
        else:
            click.echo(f"scale: {size.scale_mm_per_px:.6g} mm/px")
            click.echo(f"area: {size.total_mm2:.6g} mm^2 ({size.total_cm2:.6g} cm^2) "
                       f"across {len(components)} component(s)")

    _guarded(run, as_json)


@main.command("inspect-weights")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def inspect_weights_command(model_path, as_json):
    """Print the tensor manifest and parameter count of a weight file."""

    def run():
        manifest = read_manifest(model_path)
        tensors = manifest["tensors"]
        parameter_count = int(sum(math.prod(t["shape"]) for t in tensors))
        payload = {
            "arch": manifest["arch"],
            "version": manifest["version"],
            "tensor_count": len(tensors),
            "parameter_count": parameter_count,
            "data_bytes": int(sum(t["nbytes"] for t in tensors)),
            "tensors": [
                {
                    "name": t["name"], "shape": list(t["shape"]), "dtype": t["dtype"],
                    "offset": t["offset"], "nbytes": t["nbytes"],
                }
                for t in tensors
            ],
        }
        if as_json:
            _echo_json(payload)
            return
        name_width = max(len(t["name"]) for t in tensors)
        click.echo(f"arch: {manifest['arch']}  (manifest version {manifest['version']})")
        for t in tensors:
            shape = "x".join(str(d) for d in t["shape"])
            click.echo(f"  {t['name']:<{name_width}}  {shape:>14}  {t['dtype']}  {t['nbytes']} B")
        click.echo(f"{len(tensors)} tensors, {parameter_count} parameters, "
                   f"{payload['data_bytes']} data bytes")

    _guarded(run, as_json)


@main.command("bench")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--frames", "frames_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory of PNG/JPEG frames, processed in name order.")
@click.option("--simulate-interval", "interval_ms", type=float, default=None,
              help="Treat frames as a live feed arriving every N ms (latest-wins skipping).")
@click.option("--threshold", default=0.75, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def bench_command(model_path, frames_dir, interval_ms, threshold, as_json):
    """Per-frame latency statistics over a directory of frames."""

    def run():
        paths = sorted(
            p for p in Path(frames_dir).iterdir() if p.suffix.lower() in FRAME_SUFFIXES
        )
        if not paths:
            raise click.UsageError(f"no PNG/JPEG frames in {frames_dir}")
        model = load_model(model_path)
        params = SegmentationParams(threshold=threshold, feedback_mode="live")
        frames = [load_image(p) for p in paths]
        if interval_ms is None:
            results = [segment(model, frame, params) for frame in frames]
            latencies = [r.latency_ms for r in results]
            processed, skipped = len(frames), 0
        else:
            feed = [(i * interval_ms, frame) for i, frame in enumerate(frames)]
            outcomes = live_loop(feed, model, params)
            latencies = [o.result.latency_ms for o in outcomes if not o.skipped]
            processed = len(latencies)
            skipped = sum(1 for o in outcomes if o.skipped)
        payload = {
            "frames": len(frames),
            "processed": processed,
            "skipped": skipped,
            "p50_ms": round(float(np.percentile(latencies, 50)), 2),
            "p95_ms": round(float(np.percentile(latencies, 95)), 2),
        }
        if as_json:
            _echo_json(payload)
        else:
            click.echo(f"{payload['frames']} frames: {processed} processed, {skipped} skipped")
            click.echo(f"latency p50 {payload['p50_ms']} ms, p95 {payload['p95_ms']} ms")

    _guarded(run, as_json)


@main.command("serve")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON config; TELEWOUND_* environment variables override keys.")
def serve_command(config_path):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app, load_config

    def run():
        config = load_config(config_path)
        app = create_app(config)
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")

    _guarded(run, as_json=False)


@main.command("seed-demo")
@click.option("--data", "data_dir", required=True, type=click.Path(file_okay=False),
              help="Target directory; created if missing.")
@click.option("--seed", default=2026, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def seed_demo_command(data_dir, seed, as_json):
    """Populate a data directory with a deterministic demo environment."""

    def run():
        from .demo import seed_demo

        summary = seed_demo(data_dir, seed=seed)
        if as_json:
            _echo_json(summary)
            return
        click.echo(
            f"seeded {summary['patients']} patients, {summary['wounds']} wounds, "
            f"{summary['documentations']} documentations, {summary['slots']} slots"
        )
        for entry in summary["logins"]:
            click.echo(f"  login {entry['username']} / {entry['password']} ({entry['role']})")
        click.echo(f"weights: {summary['weights_file']}  config: {summary['config_file']}")

    _guarded(run, as_json)


if __name__ == "__main__":
    main()
