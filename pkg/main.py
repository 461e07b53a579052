"""Wong-Zakai Lab - approximation experiments for monotone SPDEs."""

import sys

from handlers.cli.handler import main

if __name__ == "__main__":
    sys.exit(main())
