"""
Command line entry point.

    nqklab [--seed N] [--out DIR] [--threads N] [--config FILE] [--log-level L] COMMAND ...

Experiment commands (kfold-1n, scale-nn, classical) read the config file and
let flags override it; the step commands (prep, train-qnn, scale-qnn, kernel,
svm, stats) work on files in the output directory so a run can be built up
one stage at a time.
"""

import functools
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from nqklab.config import SPLIT_SIZES, TrainConfig, build, load_config_file, load_experiment_config, resolve_threads
from nqklab.data import (
    FeatureChain,
    FeatureTable,
    label_tiles,
    make_split_spec,
    make_synthetic,
    read_feature_csv,
    read_pgm,
    write_feature_csv,
)
from nqklab.errors import DataError, NqkError, NumericalError
from nqklab.experiments import SYNTHETIC_DATASETS, boxplot_stats, run_classical, run_n_to_n, run_one_to_n
from nqklab.kernel import EmbeddingSpec, gram, validate_gram
from nqklab.logging_setup import configure_logging
from nqklab.reupload import init_params
from nqklab.storage_manager import ResultsStore
from nqklab.svm import accuracy, predict_many, solve_dual
from nqklab.train import qnn_accuracy, scale_qnn, train_qnn

logger = logging.getLogger(__name__)
console = Console()

app = typer.Typer(add_completion=False, no_args_is_help=True,
                  help="Neural quantum kernel laboratory: QNN training, NQK kernels and SVM experiments.")


def _guarded(command: Callable) -> Callable:
    """Report NqkError with its exit code instead of a traceback."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except NqkError as e:
            logger.error("❌ %s", e)
            raise typer.Exit(code=e.exit_code)
    return wrapper


@app.callback()
def main(ctx: typer.Context,
         seed: Optional[int] = typer.Option(None, help="Master seed; overrides the config file"),
         out: Optional[Path] = typer.Option(None, help="Output directory"),
         threads: Optional[int] = typer.Option(None, help="Worker threads (NQK_THREADS wins)"),
         config: Optional[Path] = typer.Option(None, help="JSON, YAML or TOML config file"),
         log_level: Optional[str] = typer.Option(None, help="Logging level (default NQK_LOG_LEVEL or INFO)")):
    configure_logging(log_level)
    ctx.obj = {'seed': seed, 'out': out, 'threads': threads, 'config': config}


def _settings(ctx: typer.Context) -> Dict[str, Any]:
    """Global options merged with the config file's values for the step commands."""
    values = load_config_file(ctx.obj['config']) if ctx.obj['config'] else {}
    seed = ctx.obj['seed'] if ctx.obj['seed'] is not None else values.get('seed', 0)
    out = ctx.obj['out'] or values.get('output_dir', './nqk_results')
    return {'seed': int(seed), 'store': ResultsStore(out), 'values': values,
            'threads': resolve_threads(ctx.obj['threads'] or values.get('threads'))}


def _table(data: Optional[Path], dataset: str, n_samples: int, noise: float, seed: int) -> FeatureTable:
    if data is not None:
        return read_feature_csv(data)
    if dataset not in SYNTHETIC_DATASETS:
        return read_feature_csv(dataset)
    return make_synthetic(dataset, n_samples, noise, seed)


def _train_config(preset: str, seed: int, **overrides) -> TrainConfig:
    if preset == 'custom':
        return build(TrainConfig, {'seed': seed, **{k: v for k, v in overrides.items() if v is not None}})
    return TrainConfig.from_preset(preset, seed=seed, **overrides)


def _print_rows(title: str, rows: List[Dict[str, Any]], columns: List[str]) -> None:
    table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*(f"{row[c]:.4f}" if isinstance(row[c], float) else str(row[c]) for c in columns))
    console.print(table)


@app.command()
@_guarded
def prep(ctx: typer.Context,
         dataset: str = typer.Option('circles', help="blobs, circles, moons or a feature CSV"),
         n_samples: int = typer.Option(2000, help="Synthetic sample count"),
         noise: float = typer.Option(0.1, help="Synthetic noise level"),
         p: int = typer.Option(2, help="Features kept after reduction"),
         reduction: str = typer.Option('pca', help="pca or tsvd"),
         masks: Optional[List[Path]] = typer.Option(None, help="PGM masks to tile and label instead"),
         tile: int = typer.Option(250, help="Tile edge in pixels"),
         percentile: float = typer.Option(15.0, help="Percentile of positive gammas used as threshold"),
         split_unet_train: Optional[int] = typer.Option(None, help="Also draw named splits with this many training ids"),
         name: str = typer.Option('features', help="Output file stem")):
    """Label masks, or reduce and scale a feature table, into the output directory."""
    settings = _settings(ctx)
    store: ResultsStore = settings['store']
    if masks:
        labelled = label_tiles([read_pgm(path) for path in masks], tile, percentile)
        frame = pd.DataFrame({'id': [f"tile-{i:06d}" for i in range(len(labelled.labels))],
                              'gamma': labelled.gammas,
                              'label': pd.array(labelled.labels, dtype='Int64')})
        path = store.results_dir / f"{name}_tiles.csv"
        frame.to_csv(path, index=False, float_format='%.10g')
        console.print(f"🧩 {len(frame)} tiles, epsilon {labelled.epsilon:.5f} "
                      f"({labelled.coverage_percent:.2f}% coverage), {labelled.n_excluded} excluded, "
                      f"{labelled.dropped_pixels} remainder pixels dropped -> {path}")
        return

    table = _table(None, dataset, n_samples, noise, settings['seed'])
    scaled, _ = FeatureChain.fit(table, p, reduction)
    path = store.results_dir / f"{name}.csv"
    write_feature_csv(scaled, path)
    console.print(f"✅ {scaled.n_rows} rows, p = {scaled.p}, classes {scaled.class_counts()} -> {path}")
    if split_unet_train is not None:
        split = make_split_spec(table.ids, split_unet_train, settings["seed"],
                                SPLIT_SIZES["one_to_n"], SPLIT_SIZES["n_to_n"])
        console.print(f"📁 Splits saved to {store.save_split(split)}")


@app.command('train-qnn')
@_guarded
def train_qnn_command(ctx: typer.Context,
                      data: Optional[Path] = typer.Option(None, help="Scaled feature CSV"),
                      dataset: str = typer.Option('circles'),
                      n_samples: int = typer.Option(400),
                      noise: float = typer.Option(0.1),
                      n_qubits: int = typer.Option(1),
                      layers: int = typer.Option(3),
                      preset: str = typer.Option('optimal', help="optimal, suboptimal, scaling, untrained or custom"),
                      lr: Optional[float] = typer.Option(None),
                      epochs: Optional[int] = typer.Option(None),
                      batch_size: Optional[int] = typer.Option(None),
                      gradient: Optional[str] = typer.Option(None, help="finite-diff or parameter-shift"),
                      topology: str = typer.Option('star', help="star or chain couplings"),
                      name: str = typer.Option('qnn')):
    """Train one QNN and save its best parameters and history."""
    settings = _settings(ctx)
    table = _table(data, dataset, n_samples, noise, settings['seed'])
    if data is None:
        table, _ = FeatureChain.fit(table, table.p)
    config = _train_config(preset, settings['seed'], learning_rate=lr, epochs=epochs,
                           batch_size=batch_size, gradient_method=gradient)
    init = init_params(n_qubits, layers, np.random.default_rng(settings['seed']), topology=topology)
    history = train_qnn(init, table, config)
    settings['store'].save_params(history.best_params, name)
    settings['store'].save_history(history, name)
    console.print(f"✅ cost {history.initial_cost:.5f} -> {history.best_cost:.5f}, "
                  f"accuracy {qnn_accuracy(history.best_params, table):.4f}")


@app.command('scale-qnn')
@_guarded
def scale_qnn_command(ctx: typer.Context,
                      data: Optional[Path] = typer.Option(None, help="Scaled feature CSV"),
                      dataset: str = typer.Option('circles'),
                      n_samples: int = typer.Option(400),
                      noise: float = typer.Option(0.1),
                      n_max: int = typer.Option(4),
                      layers: int = typer.Option(6),
                      preset: str = typer.Option('scaling'),
                      extension_noise: float = typer.Option(0.0, help="Gaussian width on copied angles"),
                      topology: str = typer.Option('star'),
                      name: str = typer.Option('qnn')):
    """Grow a QNN qubit by qubit, saving parameters for every size."""
    settings = _settings(ctx)
    table = _table(data, dataset, n_samples, noise, settings['seed'])
    if data is None:
        table, _ = FeatureChain.fit(table, table.p)
    histories = scale_qnn(table, n_max, _train_config(preset, settings['seed']), layers,
                          extension_noise=extension_noise, topology=topology)
    rows = []
    for history in histories:
        n = history.best_params.n_qubits
        settings['store'].save_params(history.best_params, f"{name}_n{n}")
        settings['store'].save_history(history, f"{name}_n{n}")
        rows.append({'n_qubits': n, 'initial_cost': history.initial_cost, 'best_cost': history.best_cost,
                     'accuracy': qnn_accuracy(history.best_params, table)})
    _print_rows("Iterative scaling", rows, ['n_qubits', 'initial_cost', 'best_cost', 'accuracy'])


@app.command()
@_guarded
def kernel(ctx: typer.Context,
           params: str = typer.Option(..., help="Saved parameter name"),
           kind: str = typer.Option('one_to_n', help="one_to_n or n_to_n"),
           n_qubits: Optional[int] = typer.Option(None, help="Kernel width; defaults to the QNN's own"),
           data: Optional[Path] = typer.Option(None, help="Scaled feature CSV"),
           dataset: str = typer.Option('circles'),
           n_samples: int = typer.Option(200),
           noise: float = typer.Option(0.1),
           name: str = typer.Option('gram')):
    """Build and validate a Gram matrix from saved QNN parameters."""
    settings = _settings(ctx)
    store: ResultsStore = settings['store']
    qnn = store.load_params(params)
    if qnn is None:
        raise DataError(f"No saved parameters named {params!r} in {store.params_dir}")
    table = _table(data, dataset, n_samples, noise, settings['seed'])
    if data is None:
        table, _ = FeatureChain.fit(table, table.p)
    spec = EmbeddingSpec(kind, qnn, n_qubits or qnn.n_qubits)
    matrix = gram(spec, table)
    store.save_gram(matrix, spec, name, table.p)
    labels = pd.DataFrame({'id': list(table.ids), 'label': table.labels})
    labels.to_csv(store.kernels_dir / f"{name}_labels.csv", index=False)
    report = validate_gram(matrix)
    _print_rows(f"{name}: {matrix.size}x{matrix.size} {kind}", [report], list(report))
    if not report["positive_semidefinite"]:
        raise NumericalError(f"kernel {name!r} is not PSD (minimum eigenvalue {report['min_eigenvalue']:.3e})")


@app.command()
@_guarded
def svm(ctx: typer.Context,
        gram_name: str = typer.Option('gram', '--gram', help="Saved Gram matrix name"),
        C: float = typer.Option(1.0, '--C', help="Box constraint"),
        bias: str = typer.Option('none', help="none or fitted"),
        name: str = typer.Option('svm')):
    """Solve the SVM dual on a saved Gram matrix."""
    settings = _settings(ctx)
    store: ResultsStore = settings['store']
    loaded = store.load_gram(gram_name)
    if loaded is None:
        raise DataError(f"No saved Gram matrix named {gram_name!r} in {store.kernels_dir}")
    matrix, _ = loaded
    labels = pd.read_csv(store.kernels_dir / f"{gram_name}_labels.csv", dtype={'id': str})
    if tuple(labels['id']) != matrix.point_ids:
        raise DataError(f"labels for {gram_name!r} do not match the matrix point ids")
    model = solve_dual(matrix, labels['label'].to_numpy(), C, bias=bias)
    store.save_model(model, name)
    train_acc = accuracy(predict_many(model, matrix.entries), labels['label'].to_numpy())
    console.print(f"✅ {len(model.support_indices)} support vectors, {model.iterations} SMO steps, "
                  f"training accuracy {train_acc:.4f}")


def _experiment(ctx: typer.Context, kind: str, runner: Callable, **overrides) -> None:
    if overrides.get('split_file') is not None:
        overrides['split_file'] = str(overrides['split_file'])
    config = load_experiment_config(ctx.obj['config'], kind, seed=ctx.obj['seed'],
                                    output_dir=str(ctx.obj['out']) if ctx.obj['out'] else None,
                                    **overrides)
    config = config.model_copy(update={'threads': resolve_threads(ctx.obj['threads'] or config.threads)})
    result = runner(config, ResultsStore(config.output_dir))
    means = result.summary.get('means') or result.summary.get('per_n')
    _print_rows(f"{kind} ({config.dataset})", means, list(means[0]))
    for label, path in result.paths.items():
        console.print(f"📁 {label}: {path}")


@app.command('kfold-1n')
@_guarded
def kfold_1n(ctx: typer.Context,
             dataset: Optional[str] = typer.Option(None),
             n_samples: Optional[int] = typer.Option(None),
             p: Optional[int] = typer.Option(None),
             reduction: Optional[str] = typer.Option(None),
             n_qubits: Optional[int] = typer.Option(None),
             layers: Optional[int] = typer.Option(None),
             preset: Optional[str] = typer.Option(None),
             folds: Optional[int] = typer.Option(None),
             C: Optional[float] = typer.Option(None, '--C'),
             bias: Optional[str] = typer.Option(None),
             split: Optional[Path] = typer.Option(None, help="splits.json from prep --split-unet-train"),
             split_name: Optional[str] = typer.Option(None, help="Named subset to run on")):
    """k-fold QNN vs 1-to-n NQK comparison."""
    _experiment(ctx, 'one_to_n', run_one_to_n, dataset=dataset, n_samples=n_samples, p=p,
                reduction=reduction, n_qubits=n_qubits, n_layers=layers, train_preset=preset,
                k_folds=folds, C=C, bias=bias, split_file=split, split_name=split_name)


@app.command('scale-nn')
@_guarded
def scale_nn(ctx: typer.Context,
             dataset: Optional[str] = typer.Option(None),
             n_samples: Optional[int] = typer.Option(None),
             p: Optional[int] = typer.Option(None),
             n_max: Optional[int] = typer.Option(None),
             layers: Optional[int] = typer.Option(None),
             preset: Optional[str] = typer.Option(None),
             repeats: Optional[int] = typer.Option(None),
             n_train: Optional[int] = typer.Option(None),
             n_test: Optional[int] = typer.Option(None),
             C: Optional[float] = typer.Option(None, '--C'),
             bias: Optional[str] = typer.Option(None),
             split: Optional[Path] = typer.Option(None, help="splits.json from prep --split-unet-train"),
             split_name: Optional[str] = typer.Option(None, help="Named subset to run on")):
    """Repeated iterative scaling with n-to-n kernels at every size."""
    _experiment(ctx, 'n_to_n', run_n_to_n, dataset=dataset, n_samples=n_samples, p=p, n_max=n_max,
                n_layers=layers, train_preset=preset, repeats=repeats, n_train=n_train, n_test=n_test,
                C=C, bias=bias, split_file=split, split_name=split_name)


@app.command()
@_guarded
def classical(ctx: typer.Context,
              dataset: Optional[str] = typer.Option(None),
              n_samples: Optional[int] = typer.Option(None),
              p: Optional[int] = typer.Option(None),
              reduction: Optional[str] = typer.Option(None),
              folds: Optional[int] = typer.Option(None),
              C: Optional[float] = typer.Option(None, '--C'),
              svc_preset: Optional[str] = typer.Option(None, help="p2, p3 or p45"),
              search_iters: Optional[int] = typer.Option(None, help="Random search draws (0 disables)"),
              split: Optional[Path] = typer.Option(None, help="splits.json from prep --split-unet-train"),
              split_name: Optional[str] = typer.Option(None, help="Named subset to run on")):
    """Classical SVC baseline on the shared folds."""
    _experiment(ctx, 'classical', run_classical, dataset=dataset, n_samples=n_samples, p=p,
                reduction=reduction, k_folds=folds, C=C, svc_preset=svc_preset, search_iters=search_iters,
                split_file=split, split_name=split_name)


@app.command()
@_guarded
def stats(ctx: typer.Context,
          results: Path = typer.Argument(..., help="Result CSV written by an experiment")):
    """Box statistics of the accuracies in a result CSV, per model and qubit count."""
    try:
        frame = pd.read_csv(results)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Could not read {results}: {e}") from e
    missing = {'model', 'n_qubits', 'train_acc', 'test_acc'} - set(frame.columns)
    if missing:
        raise DataError(f"{results} is missing columns {sorted(missing)}")
    rows = []
    for (model, n), group in frame.groupby(['model', 'n_qubits'], sort=True):
        for split in ('train', 'test'):
            box = boxplot_stats(group[f"{split}_acc"])
            rows.append({'model': model, 'n_qubits': int(n), 'split': split, 'q25': box.q25,
                         'median': box.median, 'q75': box.q75, 'whisker_low': box.whisker_low,
                         'whisker_high': box.whisker_high, 'outliers': len(box.outliers)})
    _print_rows(str(results), rows, list(rows[0]))


if __name__ == "__main__":
    app()
