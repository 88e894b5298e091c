#!/usr/bin/env python3
"""
Launcher for the coin tossing CLI when the package is not installed.

    python run_qcoin.py toss --n-pairs 4 --seed 7
"""

import os
import sys

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from qcoin.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
