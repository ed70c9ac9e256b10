#!/usr/bin/env python3
"""
Entry point for the sdcor command line: gen | tune | run | eval | kdist.

Usage:
    python scripts/sdcor.py gen --clusters 6 --dims 30 --n 50000 --outliers 0.01 --out data1.csv
    python scripts/sdcor.py run --data data1.csv --label-column --eta 0.005 --auto-tune --scores scores.csv
"""

import os
import sys

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
