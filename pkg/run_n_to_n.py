#!/usr/bin/env python3
"""
Run the repeated n-to-n scaling experiment and print mean accuracies per qubit count.

    python run_n_to_n.py [config.yaml]
"""

import sys

from dotenv import load_dotenv
load_dotenv()

from nqklab.config import load_experiment_config
from nqklab.errors import NqkError
from nqklab.experiments import run_n_to_n
from nqklab.logging_setup import configure_logging
from nqklab.storage_manager import ResultsStore


def main() -> int:
    configure_logging()
    config_path = sys.argv[1] if len(sys.argv) > 1 else None

    try:
        config = load_experiment_config(config_path, 'n_to_n')
        print(f"🚀 Scaling to {config.n_max} qubits, {config.repeats} repeats "
              f"({config.n_train} train / {config.n_test} test)")
        print("=" * 50)
        result = run_n_to_n(config, ResultsStore(config.output_dir))
        for row in result.summary['per_n']:
            print(f"  n={row['n_qubits']} {row['model']:<4} train {row['train_mean']:.4f} ± {row['train_std']:.4f}"
                  f"  test {row['test_mean']:.4f} ± {row['test_std']:.4f}")
        print("\n✅ n-to-n scaling completed successfully!")
        return 0
    except KeyboardInterrupt:
        print("\n⚠️  Run interrupted by user")
        return 1
    except NqkError as e:
        print(f"\n❌ {e}")
        return e.exit_code


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
