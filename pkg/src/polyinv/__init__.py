"""Polynomial loop invariants: invariant sets, truncated invariant ideals, lifting."""
