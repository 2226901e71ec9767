#!/usr/bin/env python3
"""
Histopolation experiment runner.

Runs one experiment command and writes its CSV tables plus a JSON sidecar.

Usage:
    python run_experiment.py identities --alpha 2 --beta 2
    python run_experiment.py sv-decay --alpha 1.5 --beta 1 --n-list 1000,2000,3000
    python run_experiment.py stability --config configs/stability.json --seed 7
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
