import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from nqklab.data import SplitSpec
from nqklab.errors import DataError
from nqklab.kernel import EmbeddingSpec, GramMatrix
from nqklab.reupload import QnnParams
from nqklab.svm import SvmModel
from nqklab.train import TrainHistory

logger = logging.getLogger(__name__)

RESULT_FLOAT_FORMAT = '%.6f'


def sha256_file(path: Union[str, Path]) -> str:
    """Content hash of an input file, recorded in result provenance."""
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def sha256_json(payload: Any) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


class ResultsStore:
    """
    Manages persistence of trained parameters, kernels, SVM models and
    experiment results under one output directory.

    Gram matrices are stored as little-endian float64 .npy files with a JSON
    sidecar in metadata/ naming the embedding digest, point ids, p and n.
    """

    def __init__(self, base_dir: Union[str, Path] = "./nqk_results"):
        self.base_dir = Path(base_dir)
        self.params_dir = self.base_dir / "params"
        self.kernels_dir = self.base_dir / "kernels"
        self.models_dir = self.base_dir / "models"
        self.results_dir = self.base_dir / "results"
        self.metadata_dir = self.base_dir / "metadata"

        for directory in (self.params_dir, self.kernels_dir, self.models_dir,
                          self.results_dir, self.metadata_dir):
            directory.mkdir(parents=True, exist_ok=True)

    def _write_json(self, path: Path, payload: Mapping[str, Any]) -> str:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
        return str(path)

    def _read_json(self, path: Path) -> Optional[Dict[str, Any]]:
        if not path.exists():
            logger.warning("No saved file at %s", path)
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"Corrupt JSON in {path}: {e}") from e

    # Parameters and training histories

    def save_params(self, params: QnnParams, name: str) -> str:
        path = self._write_json(self.params_dir / f"{name}.json", params.to_dict())
        logger.info("💾 Saved %d-qubit QNN parameters to %s", params.n_qubits, path)
        return path

    def load_params(self, name: str) -> Optional[QnnParams]:
        data = self._read_json(self.params_dir / f"{name}.json")
        return QnnParams.from_dict(data) if data is not None else None

    def save_history(self, history: TrainHistory, name: str) -> str:
        return self._write_json(self.params_dir / f"{name}_history.json", history.to_dict())

    def load_history(self, name: str) -> Optional[TrainHistory]:
        data = self._read_json(self.params_dir / f"{name}_history.json")
        return TrainHistory.from_dict(data) if data is not None else None

    # Kernels

    def save_gram(self, gram: GramMatrix, spec: EmbeddingSpec, name: str, p: int) -> str:
        """
        Save a Gram matrix and its sidecar.

        Args:
            gram: Kernel matrix with point ids
            spec: Embedding that produced it
            name: File stem
            p: Feature count of the embedded points

        Returns:
            Path to the .npy file
        """
        matrix_file = self.kernels_dir / f"{name}.npy"
        np.save(matrix_file, gram.entries.astype('<f8'), allow_pickle=False)
        metadata = {
            'name': name,
            'kind': spec.kind,
            'embedding_digest': spec.digest(),
            'n_qubits': spec.n_qubits,
            'n_layers': spec.params.n_layers,
            'p': p,
            'size': gram.size,
            'point_ids': list(gram.point_ids),
            'created_at': datetime.now(timezone.utc).isoformat(),
        }
        self._write_json(self.metadata_dir / f"{name}_kernel_metadata.json", metadata)
        logger.info("💾 Saved %dx%d %s kernel to %s", gram.size, gram.size, spec.kind, matrix_file)
        return str(matrix_file)

    def load_gram(self, name: str) -> Optional[Tuple[GramMatrix, Dict[str, Any]]]:
        matrix_file = self.kernels_dir / f"{name}.npy"
        metadata = self._read_json(self.metadata_dir / f"{name}_kernel_metadata.json")
        if metadata is None or not matrix_file.exists():
            return None
        entries = np.load(matrix_file, allow_pickle=False)
        return GramMatrix(entries, tuple(metadata['point_ids'])), metadata

    # SVM models

    def save_model(self, model: SvmModel, name: str) -> str:
        return self._write_json(self.models_dir / f"{name}.json", model.to_dict())

    def load_model(self, name: str) -> Optional[SvmModel]:
        data = self._read_json(self.models_dir / f"{name}.json")
        return SvmModel.from_dict(data) if data is not None else None

    # Experiment outputs

    def save_rows(self, rows: Sequence[Mapping[str, Any]], name: str, columns: Sequence[str]) -> str:
        """Write result rows as CSV with a fixed float format so re-runs are byte-identical."""
        path = self.results_dir / f"{name}.csv"
        frame = pd.DataFrame(list(rows), columns=list(columns))
        frame.to_csv(path, index=False, float_format=RESULT_FLOAT_FORMAT, lineterminator='\n')
        logger.info("📊 Wrote %d rows to %s", len(frame), path)
        return str(path)

    def load_rows(self, name: str) -> Optional[pd.DataFrame]:
        path = self.results_dir / f"{name}.csv"
        if not path.exists():
            logger.warning("No saved results at %s", path)
            return None
        return pd.read_csv(path)

    def save_summary(self, summary: Mapping[str, Any], name: str) -> str:
        return self._write_json(self.results_dir / f"{name}_summary.json", summary)

    def load_summary(self, name: str) -> Optional[Dict[str, Any]]:
        return self._read_json(self.results_dir / f"{name}_summary.json")

    def save_whiskers(self, stats: Mapping[str, Mapping[str, Any]], name: str) -> str:
        """
        gnuplot candlestick data: one row per group with
        index, whisker_low, q25, median, q75, whisker_high, then the group label.
        Outliers go to a second block after two blank lines.
        """
        path = self.results_dir / f"{name}_whiskers.dat"
        lines: List[str] = ["# index whisker_low q25 median q75 whisker_high label"]
        for index, (label, box) in enumerate(stats.items()):
            values = [box['whisker_low'], box['q25'], box['median'], box['q75'], box['whisker_high']]
            lines.append(f"{index} " + " ".join(f"{v:.6f}" for v in values) + f" {label}")
        lines += ["", "", "# index outlier label"]
        for index, (label, box) in enumerate(stats.items()):
            lines += [f"{index} {v:.6f} {label}" for v in box['outliers']]
        with open(path, 'w', encoding='utf-8') as f:
            f.write("\n".join(lines) + "\n")
        return str(path)

    # Splits

    def save_split(self, split: SplitSpec, name: str = "splits") -> str:
        path = self.metadata_dir / f"{name}.json"
        split.save(path)
        return str(path)

    def load_split(self, name: str = "splits") -> Optional[SplitSpec]:
        path = self.metadata_dir / f"{name}.json"
        if not path.exists():
            logger.warning("No saved split at %s", path)
            return None
        return SplitSpec.load(path)

    def list_outputs(self) -> Dict[str, List[str]]:
        """File stems present in each store directory."""
        return {
            'params': sorted(p.stem for p in self.params_dir.glob("*.json")),
            'kernels': sorted(p.stem for p in self.kernels_dir.glob("*.npy")),
            'models': sorted(p.stem for p in self.models_dir.glob("*.json")),
            'results': sorted(p.name for p in self.results_dir.iterdir()),
        }
