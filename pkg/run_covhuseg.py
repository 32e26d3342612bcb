"""
CovHuSeg command line - run with ``python run_covhuseg.py <subcommand> --help``.
"""

import sys

from cli.main import main

if __name__ == "__main__":
    sys.exit(main())
