"""Run the limitset command line with ``python -m limitset``."""
import sys

from .cli import main

sys.exit(main())
