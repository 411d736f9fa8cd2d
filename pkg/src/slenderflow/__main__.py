"""Allow ``python -m slenderflow`` to behave like the console script."""

import sys

from .harness.cli import main

sys.exit(main())
