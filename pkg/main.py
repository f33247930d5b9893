"""
bootperc - Main Entry Point
Equivalent to the installed ``bootperc`` console script.
"""

import sys

from bootperc.run import main

if __name__ == "__main__":
    sys.exit(main())
