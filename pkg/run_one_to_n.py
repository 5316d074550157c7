#!/usr/bin/env python3
"""
Run the k-fold QNN vs 1-to-n NQK comparison for the optimal and sub-optimal
training presets on the same folds.

    python run_one_to_n.py [config.yaml]
"""

import sys

from dotenv import load_dotenv
load_dotenv()

from nqklab.config import load_experiment_config
from nqklab.errors import NqkError
from nqklab.experiments import run_one_to_n
from nqklab.logging_setup import configure_logging
from nqklab.storage_manager import ResultsStore


def main() -> int:
    configure_logging()
    config_path = sys.argv[1] if len(sys.argv) > 1 else None

    print("🚀 Starting 1-to-n NQK runs")
    print("=" * 50)
    try:
        for preset in ('optimal', 'suboptimal'):
            config = load_experiment_config(config_path, 'one_to_n', train_preset=preset)
            store = ResultsStore(f"{config.output_dir}/one_to_n_{preset}")
            result = run_one_to_n(config, store)
            for row in result.summary['means']:
                print(f"  {preset:<10} {row['model']:<4} train {row['train_mean']:.4f} ± {row['train_std']:.4f}"
                      f"  test {row['test_mean']:.4f} ± {row['test_std']:.4f}")
        print("\n✅ 1-to-n runs completed successfully!")
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
