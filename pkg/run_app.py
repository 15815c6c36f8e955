#!/usr/bin/env python3
"""
Entry point script for the inequality-test state preparation runner.

Usage:
    python run_app.py --mode inverse --data alphas.csv --const-c 1 --m 4
    python run_app.py --mode uniform --d 3
    python run_app.py --mode estimate --epsilon 1.52587890625e-05
    python run_app.py --mode inverse --data alphas.csv --sweep m=2:8 --out sweep.csv

Requirements:
    - See requirements.txt for dependencies
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.app import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
