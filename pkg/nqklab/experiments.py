"""
The three experiment families and the statistics they report.

* one_to_n: k-fold; per fold a 1-qubit QNN is trained and its angles are
  replicated on n qubits to form the kernel.
* n_to_n: repeated train/test draws; per repeat the QNN is scaled up qubit by
  qubit and every intermediate size becomes a kernel.
* classical: linear / RBF SVC on the same folds as one_to_n.

Each fold or repeat is an independent job keyed by its index and seeded from
the experiment seed plus that index, so the thread count never changes the
numbers written out.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from nqklab.config import ExperimentConfig, TrainConfig, get_svc_preset
from nqklab.data import (
    FeatureChain,
    FeatureTable,
    SplitSpec,
    fold_partitions,
    make_synthetic,
    read_feature_csv,
    stratified_kfold,
    train_test_indices,
)
from nqklab.errors import ConfigError, DataError
from nqklab.kernel import EmbeddingSpec, cross_gram, ensure_psd, gram
from nqklab.reupload import init_params
from nqklab.storage_manager import ResultsStore, sha256_file, sha256_json
from nqklab.svm import (
    DEFAULT_SVC_SPACE,
    accuracy,
    fit_svc,
    predict_many,
    random_search_svc,
    solve_dual,
    svc_predict,
)
from nqklab.train import qnn_accuracy, scale_qnn, train_qnn
from nqklab.utils.worker_pool import run_jobs

logger = logging.getLogger(__name__)

SYNTHETIC_DATASETS = ('blobs', 'circles', 'moons')
FOLD_COLUMNS = ('fold', 'model', 'n_qubits', 'train_acc', 'test_acc')
REPEAT_COLUMNS = ('repeat', 'model', 'n_qubits', 'train_acc', 'test_acc')
COST_COLUMNS = ('repeat', 'n_qubits', 'initial_cost', 'best_cost')


@dataclass
class BoxplotStats:
    q25: float
    median: float
    q75: float
    whisker_low: float
    whisker_high: float
    outliers: List[float] = field(default_factory=list)


def boxplot_stats(values: Sequence[float]) -> BoxplotStats:
    """
    Quartiles by linear interpolation; whiskers at the most extreme values
    within 1.5 IQR of the box; everything beyond them is an outlier.
    """
    data = np.sort(np.asarray(values, dtype=np.float64))
    if data.size == 0:
        raise ValueError("boxplot_stats needs at least one value")
    q25, median, q75 = np.percentile(data, [25, 50, 75])
    iqr = q75 - q25
    low_fence, high_fence = q25 - 1.5 * iqr, q75 + 1.5 * iqr
    inside = data[(data >= low_fence) & (data <= high_fence)]
    outliers = data[(data < low_fence) | (data > high_fence)]
    return BoxplotStats(float(q25), float(median), float(q75), float(inside.min()), float(inside.max()),
                        [float(v) for v in outliers])


@dataclass
class ExperimentResult:
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any]
    paths: Dict[str, str] = field(default_factory=dict)


def load_dataset(config: ExperimentConfig) -> Tuple[FeatureTable, str]:
    """
    Feature table for the configured dataset and the content hash of its source.

    With a split_file only the ids of the resolved named subset are kept, in
    the order the split lists them, and the split joins the hashed inputs.
    """
    table, digest = _load_source(config)
    if config.split_file is None:
        return table, digest
    split = SplitSpec.load(config.split_file)
    name = config.resolved_split_name()
    ids = split.subsets.get(name)
    if not ids:
        raise DataError(f"Split file {config.split_file} has no {name!r} ids")
    logger.info("Using split %r from %s: %d of %d rows", name, config.split_file, len(ids), table.n_rows)
    return table.select_ids(ids), sha256_json({'input': digest, 'split': split.to_dict(), 'name': name})


def _load_source(config: ExperimentConfig) -> Tuple[FeatureTable, str]:
    if config.dataset in SYNTHETIC_DATASETS:
        n_features = 2 if config.dataset != 'blobs' else max(2, config.p)
        table = make_synthetic(config.dataset, config.n_samples, config.noise, config.seed, n_features)
        digest = sha256_json({'generator': config.dataset, 'n_samples': config.n_samples,
                              'noise': config.noise, 'seed': config.seed, 'n_features': n_features})
        return table, digest
    path = Path(config.dataset)
    if not path.exists():
        raise DataError(f"Dataset {config.dataset!r} is neither a generator nor an existing file")
    return read_feature_csv(path), sha256_file(path)


def _check_dimensions(table: FeatureTable, p: int) -> None:
    if p > table.p:
        raise ConfigError(f"p = {p} features requested from a {table.p}-column dataset")


def _provenance(config: ExperimentConfig, digest: str, **extra) -> Dict[str, Any]:
    return {
        'config': config.model_dump(mode='json'),
        'train': config.resolved_train().model_dump(mode='json') if config.kind != 'classical' else None,
        'seed': config.seed,
        'input_sha256': digest,
        **extra,
    }


def _group_stats(rows: Sequence[Dict[str, Any]], keys: Sequence[str]) -> Dict[str, Dict[str, Any]]:
    """Box statistics of train and test accuracy per group of rows sharing the given keys."""
    groups: Dict[str, Dict[str, List[float]]] = {}
    for row in rows:
        label = "_".join(str(row[k]) for k in keys)
        for split in ('train', 'test'):
            groups.setdefault(f"{label}_{split}", {'values': []})['values'].append(row[f"{split}_acc"])
    return {label: asdict(boxplot_stats(group['values'])) for label, group in groups.items()}


def _means(rows: Sequence[Dict[str, Any]], keys: Sequence[str]) -> List[Dict[str, Any]]:
    """Mean and population std of the accuracies per group, in first-seen group order."""
    order: List[Tuple] = []
    acc: Dict[Tuple, Dict[str, List[float]]] = {}
    for row in rows:
        key = tuple(row[k] for k in keys)
        if key not in acc:
            order.append(key)
            acc[key] = {'train': [], 'test': []}
        acc[key]['train'].append(row['train_acc'])
        acc[key]['test'].append(row['test_acc'])
    out = []
    for key in order:
        train, test = np.asarray(acc[key]['train']), np.asarray(acc[key]['test'])
        out.append({**dict(zip(keys, key)),
                    'train_mean': float(train.mean()), 'train_std': float(train.std()),
                    'test_mean': float(test.mean()), 'test_std': float(test.std()),
                    'count': int(train.size)})
    return out


def _fold_tables(table: FeatureTable, train_idx: np.ndarray, test_idx: np.ndarray,
                 config: ExperimentConfig) -> Tuple[FeatureTable, FeatureTable]:
    train, chain = FeatureChain.fit(table.subset(train_idx), config.p, config.reduction)
    return train, chain.transform(table.subset(test_idx))


def _nqk_accuracies(spec: EmbeddingSpec, train: FeatureTable, test: FeatureTable,
                    config: ExperimentConfig) -> Tuple[float, float]:
    K = gram(spec, train)
    ensure_psd(K)
    model = solve_dual(K, train.labels, config.C, bias=config.bias)
    train_acc = accuracy(predict_many(model, K.entries), train.labels)
    test_acc = accuracy(predict_many(model, cross_gram(spec, train, test)), test.labels)
    return train_acc, test_acc


def _seeded(train: TrainConfig, seed: int) -> TrainConfig:
    return train.model_copy(update={'seed': seed})


def _save(store: Optional[ResultsStore], name: str, rows, columns, summary, stats) -> Dict[str, str]:
    if store is None:
        return {}
    return {
        'rows': store.save_rows(rows, name, columns),
        'summary': store.save_summary(summary, name),
        'whiskers': store.save_whiskers(stats, name),
    }


def run_one_to_n(config: ExperimentConfig, store: Optional[ResultsStore] = None) -> ExperimentResult:
    """
    k-fold comparison of the single-qubit QNN with its 1-to-n kernel.

    Args:
        config: Experiment settings; kind must be 'one_to_n'
        store: Where CSV, summary and whisker files go; nothing is written when None

    Returns:
        ExperimentResult with one 'qnn' and one 'nqk' row per fold
    """
    if config.kind != 'one_to_n':
        raise ConfigError(f"run_one_to_n got a {config.kind!r} config")
    table, digest = load_dataset(config)
    _check_dimensions(table, config.p)
    folds = stratified_kfold(table.labels, config.k_folds, config.seed)
    train_config = config.resolved_train()
    logger.info("🚀 1-to-%d NQK: %d points, %d folds, preset %s", config.n_qubits, table.n_rows,
                config.k_folds, config.train_preset)

    def run_fold(job: Tuple[int, Tuple[np.ndarray, np.ndarray]]) -> List[Dict[str, Any]]:
        fold, (train_idx, test_idx) = job
        train, test = _fold_tables(table, train_idx, test_idx, config)
        init = init_params(1, config.n_layers, np.random.default_rng(config.seed + fold))
        history = train_qnn(init, train, _seeded(train_config, config.seed + fold))
        params = history.best_params
        spec = EmbeddingSpec('one_to_n', params, config.n_qubits)
        nqk_train, nqk_test = _nqk_accuracies(spec, train, test, config)
        return [
            {'fold': fold, 'model': 'qnn', 'n_qubits': 1,
             'train_acc': qnn_accuracy(params, train), 'test_acc': qnn_accuracy(params, test)},
            {'fold': fold, 'model': 'nqk', 'n_qubits': config.n_qubits,
             'train_acc': nqk_train, 'test_acc': nqk_test},
        ]

    jobs = list(enumerate(fold_partitions(folds)))
    rows = [row for fold_rows in run_jobs(run_fold, jobs, config.threads, desc="folds") for row in fold_rows]
    stats = _group_stats(rows, ('model',))
    summary = {
        **_provenance(config, digest, fold_seeds=[config.seed + f for f in range(len(folds))]),
        'fold_sizes': [int(f.size) for f in folds],
        'means': _means(rows, ('model', 'n_qubits')),
        'boxplots': stats,
    }
    logger.info("✅ 1-to-%d NQK finished: %s", config.n_qubits,
                ", ".join(f"{m['model']} test {m['test_mean']:.4f}" for m in summary['means']))
    return ExperimentResult(rows, summary, _save(store, 'one_to_n', rows, FOLD_COLUMNS, summary, stats))


def run_n_to_n(config: ExperimentConfig, store: Optional[ResultsStore] = None) -> ExperimentResult:
    """
    Repeated train/test draws; the QNN is scaled from 1 to n_max qubits and
    each size is scored on its own and as an n-to-n kernel.
    """
    if config.kind != 'n_to_n':
        raise ConfigError(f"run_n_to_n got a {config.kind!r} config")
    table, digest = load_dataset(config)
    _check_dimensions(table, config.p)
    n_train = config.n_train or int(round(table.n_rows * 5 / 7))
    n_test = config.n_test or table.n_rows - n_train
    train_config = config.resolved_train()
    logger.info("🚀 n-to-n scaling to %d qubits: %d train / %d test, %d repeats",
                config.n_max, n_train, n_test, config.repeats)

    def run_repeat(repeat: int) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]]]:
        seed = config.seed + repeat
        train_idx, test_idx = train_test_indices(table.labels, n_train, n_test, seed)
        train, test = _fold_tables(table, train_idx, test_idx, config)
        histories = scale_qnn(train, config.n_max, _seeded(train_config, seed), config.n_layers)
        rows, costs = [], []
        for history in histories:
            params = history.best_params
            n = params.n_qubits
            costs.append({'repeat': repeat, 'n_qubits': n, 'initial_cost': history.initial_cost,
                          'best_cost': history.best_cost})
            rows.append({'repeat': repeat, 'model': 'qnn', 'n_qubits': n,
                         'train_acc': qnn_accuracy(params, train), 'test_acc': qnn_accuracy(params, test)})
            nqk_train, nqk_test = _nqk_accuracies(EmbeddingSpec('n_to_n', params, n), train, test, config)
            rows.append({'repeat': repeat, 'model': 'nqk', 'n_qubits': n,
                         'train_acc': nqk_train, 'test_acc': nqk_test})
        return rows, costs

    outputs = run_jobs(run_repeat, list(range(config.repeats)), config.threads, desc="repeats")
    rows = [row for repeat_rows, _ in outputs for row in repeat_rows]
    costs = [cost for _, repeat_costs in outputs for cost in repeat_costs]
    rows.sort(key=lambda r: (r['n_qubits'], r['model'], r['repeat']))
    stats = _group_stats(rows, ('model', 'n_qubits'))
    summary = {
        **_provenance(config, digest, repeat_seeds=[config.seed + r for r in range(config.repeats)]),
        'n_train': n_train,
        'n_test': n_test,
        'per_n': _means(rows, ('n_qubits', 'model')),
        'costs': costs,
        'boxplots': stats,
    }
    paths = _save(store, 'n_to_n', rows, REPEAT_COLUMNS, summary, stats)
    if store is not None:
        paths['costs'] = store.save_rows(costs, 'n_to_n_costs', COST_COLUMNS)
    logger.info("✅ n-to-n scaling finished")
    return ExperimentResult(rows, summary, paths)


def _svc_settings(config: ExperimentConfig) -> Tuple[int, Dict[str, Any]]:
    if config.svc_preset is not None:
        preset = get_svc_preset(config.svc_preset)
        p = preset.pop('p')
        if p != config.p:
            logger.info("SVC preset %s uses p = %d instead of %d", config.svc_preset, p, config.p)
        # gamma only matters for rbf; the presets are linear
        if preset['kernel'] != 'rbf':
            preset['gamma'] = None
        return p, preset
    return config.p, {'kernel': 'linear', 'C': config.C, 'gamma': None}


def run_classical(config: ExperimentConfig, store: Optional[ResultsStore] = None) -> ExperimentResult:
    """
    SVC baseline on the same stratified folds the quantum runs use.

    With search_iters > 0 a random search over C, kernel and gamma (with the
    feature chain refit per fold) picks the hyperparameters first.
    """
    if config.kind != 'classical':
        raise ConfigError(f"run_classical got a {config.kind!r} config")
    table, digest = load_dataset(config)
    p, settings = _svc_settings(config)
    _check_dimensions(table, p)
    search = None
    if config.search_iters > 0:
        space = {**DEFAULT_SVC_SPACE, 'n_components': [p]}
        search = random_search_svc(table, config.search_iters, config.seed, space,
                                   k_folds=config.k_folds, reduction=config.reduction)
        settings = {k: search.best_params.get(k) for k in ('kernel', 'C', 'gamma')}
        if settings['kernel'] != 'rbf':
            settings['gamma'] = None
    folds = stratified_kfold(table.labels, config.k_folds, config.seed)
    model_name = f"svc_{settings['kernel']}"
    logger.info("🚀 Classical %s: C=%.4g, %d folds", model_name, settings['C'], config.k_folds)

    def run_fold(job: Tuple[int, Tuple[np.ndarray, np.ndarray]]) -> Dict[str, Any]:
        fold, (train_idx, test_idx) = job
        train, chain = FeatureChain.fit(table.subset(train_idx), p, config.reduction)
        test = chain.transform(table.subset(test_idx))
        model = fit_svc(train, settings['kernel'], float(settings['C']), settings['gamma'])
        return {'fold': fold, 'model': model_name, 'n_qubits': 0,
                'train_acc': accuracy(svc_predict(model, train, train.features), train.labels),
                'test_acc': accuracy(svc_predict(model, train, test.features), test.labels)}

    rows = run_jobs(run_fold, list(enumerate(fold_partitions(folds))), config.threads, desc="folds")
    stats = _group_stats(rows, ('model',))
    summary = {
        **_provenance(config, digest),
        'p': p,
        'svc': settings,
        'search': None if search is None else {'best_params': search.best_params,
                                               'best_score': search.best_score,
                                               'n_trials': len(search.trials)},
        'fold_sizes': [int(f.size) for f in folds],
        'means': _means(rows, ('model',)),
        'boxplots': stats,
    }
    logger.info("✅ Classical %s finished: test %.4f", model_name, summary['means'][0]['test_mean'])
    return ExperimentResult(rows, summary, _save(store, 'classical', rows, FOLD_COLUMNS, summary, stats))


EXPERIMENTS = {
    'one_to_n': run_one_to_n,
    'n_to_n': run_n_to_n,
    'classical': run_classical,
}


def run_experiment(config: ExperimentConfig, store: Optional[ResultsStore] = None) -> ExperimentResult:
    return EXPERIMENTS[config.kind](config, store)
