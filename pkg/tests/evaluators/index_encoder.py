#!/usr/bin/env python3
"""HOSI/1 test evaluator: replies with the running line index (order probe)."""
import sys

sys.stdin.readline()  # handshake
i = 0
for line in sys.stdin:
    if not line.strip():
        continue
    print(float(i), flush=True)
    i += 1
