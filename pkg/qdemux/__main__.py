"""Run the command line with ``python -m qdemux``."""

from .cli import main

main()
