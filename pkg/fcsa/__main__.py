"""Allow running the CLI as python -m fcsa."""
import sys

from .cli import main

sys.exit(main())
