# scripts/run_all.py
from __future__ import annotations
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from g2p_complexity.cli import main

if __name__ == "__main__":
    # python scripts/run_all.py --manifest manifest.ini --parallel 4 --compare
    sys.exit(main(["run-all", *sys.argv[1:]]))
