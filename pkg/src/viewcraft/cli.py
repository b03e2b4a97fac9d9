"""Command-line entry points.

Exit codes: 0 on success, 1 on validation problems (bad arguments, bad
instructions, failed edits), 2 when a model backend cannot be reached.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .errors import BackendUnavailable, ViewcraftError
from .imagebuf import ImageBuffer


def _load_image(path: str) -> ImageBuffer:
    return ImageBuffer.from_png(Path(path).read_bytes())


def _load_pipeline_config(path: str | None):
    from .pipeline import PipelineConfig, load_config

    return load_config(path) if path else PipelineConfig.default()


@click.group()
def cli() -> None:
    """View-conditioned object editing pipeline."""


@cli.command()
@click.option("--source", "source_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Source image (PNG).")
@click.option("--reference", "reference_path",
              type=click.Path(exists=True, dir_okay=False),
              help="Reference image for replace instructions.")
@click.option("--instruction", required=True, help="Natural-language edit.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False),
              help="Pipeline YAML; defaults to all-stub backends.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              default="edit-output.png", show_default=True)
@click.option("--bbox", type=(int, int, int, int), default=None,
              help="Override source bbox: X0 Y0 WIDTH HEIGHT.")
@click.option("--two-stage", is_flag=True,
              help="Remove-then-insert synthesis (ablation arm).")
@click.option("--inject-view-error-deg", type=float, default=0.0,
              help="Perturb the target azimuth (robustness experiments).")
@click.option("--json", "as_json", is_flag=True,
              help="Print the full result record (with provenance) to stdout.")
def edit(source_path, reference_path, instruction, seed, config_path,
         out_path, bbox, two_stage, inject_view_error_deg, as_json):
    """Run one edit and write the output image."""
    from .geometry import BoundingBox
    from .pipeline import EditOptions, EditRequest, Orchestrator

    config = _load_pipeline_config(config_path)
    request = EditRequest(
        source_image=_load_image(source_path),
        instruction=instruction,
        reference_image=(_load_image(reference_path)
                         if reference_path else None),
        source_bbox=BoundingBox(*bbox) if bbox else None,
        seed=seed,
        options=EditOptions(two_stage=two_stage,
                            inject_view_error_deg=inject_view_error_deg),
    )
    result = Orchestrator(config).run_edit(request)
    Path(out_path).write_bytes(result.output.to_png())
    if as_json:
        click.echo(json.dumps(result.to_json(), indent=2, sort_keys=True))
    else:
        click.echo(f"status: {result.status}")
        click.echo(f"stages: {', '.join(result.stages)}")
        click.echo(f"output: {out_path}")
    if result.status != "ok":
        click.echo(f"edit failed at stage {result.failure['stage']}: "
                   f"{result.failure['detail']}", err=True)
        return 1
    return 0


@cli.group()
def dataset() -> None:
    """Synthetic multi-view dataset tools."""


@dataset.command("make")
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False))
@click.option("--objects", type=int, default=20, show_default=True)
@click.option("--views", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--size", type=int, default=128, show_default=True,
              help="Rendered image side length in pixels.")
@click.option("--scale", type=float, default=None,
              help="World units per half-frame at unit radius.")
def dataset_make(out_dir, objects, views, seed, size, scale):
    """Render a labeled pose dataset and write its manifest."""
    from .estimator import make_synthetic_dataset

    manifest = make_synthetic_dataset(out_dir, n_objects=objects,
                                      views_per_object=views, seed=seed,
                                      image_size=(size, size), scale=scale)
    click.echo(str(manifest))
    return 0


@cli.command("train")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Weights file (.npz).")
@click.option("--extractor", default="conv-small", show_default=True)
@click.option("--epochs", type=int, default=40, show_default=True)
@click.option("--learning-rate", type=float, default=1e-3, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Also write the training report JSON here.")
def train_command(manifest_path, out_path, extractor, epochs, learning_rate,
                  batch_size, seed, report_path):
    """Train the pose regressor on a dataset manifest."""
    from .estimator import TrainConfig, train

    config = TrainConfig(feature_extractor_id=extractor, epochs=epochs,
                         learning_rate=learning_rate, batch_size=batch_size,
                         seed=seed)
    params, report = train(manifest_path, config)
    params.save(out_path)
    if report_path:
        Path(report_path).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n")
    held = report.get("held_out")
    if held:
        click.echo(f"held-out aggregate MAE: {held['aggregate']['mae']:.3f} deg")
    click.echo(f"weights: {out_path}")
    return 0


@cli.command("evaluate")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--params", "params_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--split", default="test", show_default=True,
              type=click.Choice(["train", "test"]))
@click.option("--json", "as_json", is_flag=True)
def evaluate_command(manifest_path, params_path, split, as_json):
    """Evaluate trained weights on a manifest split."""
    from .estimator import EstimatorParameters, evaluate

    result = evaluate(manifest_path, EstimatorParameters.load(params_path),
                      split=split)
    if as_json:
        click.echo(json.dumps(result, indent=2, sort_keys=True))
    else:
        for component in ("azimuth", "elevation", "aggregate"):
            row = result[component]
            click.echo(f"{component:>10}: MAE {row['mae']:7.3f}  "
                       f"RMSE {row['rmse']:7.3f} deg")
        t = result["translation"]
        click.echo(f"translation: MAE {t['mae']:.4f}  RMSE {t['rmse']:.4f} "
                   f"(scene units), n={result['n']}")
    return 0


@cli.group()
def bench() -> None:
    """Quantitative benchmark protocols."""


@bench.command("robustness")
@click.option("--n-per-bucket", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Also write the report JSON here.")
def bench_robustness_command(n_per_bucket, seed, out_path):
    """View-error degradation buckets on the built-in stub scenes."""
    from .evalharness import bench_robustness, demo_setup

    config, scenes, orchestrator = demo_setup()
    report = bench_robustness(config, scenes, n_per_bucket=n_per_bucket,
                              seed=seed, orchestrator=orchestrator)
    if out_path:
        report.save(out_path)
    click.echo(report.to_text())
    return 0


@bench.command("backbones")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--extractor", "extractors", multiple=True,
              default=("conv-small",), show_default=True)
@click.option("--epochs", type=int, default=40, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def bench_backbones_command(manifest_path, extractors, epochs, seed, out_path):
    """Train/evaluate each extractor on one manifest and tabulate."""
    from .estimator import TrainConfig
    from .evalharness import bench_backbones

    base = TrainConfig(epochs=epochs, seed=seed)
    report = bench_backbones(manifest_path, extractors, base_config=base)
    if out_path:
        report.save(out_path)
    click.echo(report.to_text())
    return 0


@cli.command("serve")
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_command(config_path, host, port):
    """Run the editing service over HTTP."""
    from .pipeline import serve

    serve(_load_pipeline_config(config_path), host=host, port=port)
    return 0


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        rv = cli.main(args=argv, prog_name="viewcraft", standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help and friends
        return int(exc.exit_code)
    except click.ClickException as exc:  # includes usage errors
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except BackendUnavailable as exc:
        click.echo(f"backend unavailable: {exc}", err=True)
        return 2
    except ViewcraftError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return int(rv or 0)


if __name__ == "__main__":
    raise SystemExit(main())
