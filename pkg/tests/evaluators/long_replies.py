#!/usr/bin/env python3
"""HOSI/1 test evaluator with long reply lines (pipe backpressure probe)."""
import sys

sys.stdin.readline()  # handshake
for line in sys.stdin:
    parts = line.split()
    if not parts:
        continue
    # full-precision product: ~20 characters per reply line
    print(repr(float(parts[0]) * float(parts[-1])), flush=True)
