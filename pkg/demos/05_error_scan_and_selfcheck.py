"""Approximation errors with fitted log-log slopes, then the self-check suite.

Equivalent to ``htqueue error-scan --preset example1`` followed by
``htqueue selfcheck``.
"""
from htqueue.cli import main

main(["error-scan", "--preset", "example1", "--format", "md"])
raise SystemExit(main(["selfcheck"]))
