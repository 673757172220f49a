"""Allow running the CLI as a module: python -m virtual_twins_tools"""

from virtual_twins_tools.cli import main
import sys

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
