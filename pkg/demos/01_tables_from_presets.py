"""Render the bundled moment tables through the command line interface.

Each preset describes one service/interarrival pair and the regimes to
tabulate. The same tables can be produced with ``htqueue moments --preset``.

Run: python demos/01_tables_from_presets.py [preset ...]
"""
import sys

from htqueue.cli import main

presets = sys.argv[1:] or ["example1", "example4"]
for name in presets:
    print(f"# preset {name}\n")
    code = main(["moments", "--preset", name, "--format", "md"])
    print(f"(exit status {code})\n")
