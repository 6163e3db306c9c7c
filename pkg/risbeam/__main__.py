"""
Entry point for running RisBeam as a module.

This allows the package to be executed with:
    python -m risbeam design --config scenario.yaml --out out/
"""

import sys

from risbeam.main import main

if __name__ == "__main__":
    sys.exit(main())
