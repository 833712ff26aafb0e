#!/usr/bin/env python3
"""HOSI/1 test evaluator: answers twice, then exits."""
import sys

sys.stdin.readline()  # handshake
for _ in range(2):
    sys.stdin.readline()
    print("0.5", flush=True)
sys.exit(3)
