"""Exact maximum-weight sparse induced subgraph solvers for P6-free graphs.

The package solves problems of the form "find a maximum-weight vertex set
Sol whose induced subgraph has an elimination forest of height at most d
and satisfies a regular property", which covers maximum weight independent
set (d = 1) and maximum-weight induced forest (the complement of a minimum
feedback vertex set).  The algorithm enumerates a polynomial family of
carver sets, each able to split the graph along a bag of a suitable clique
tree, and runs a dynamic program over treedepth structures guided by a
threshold tree automaton.  Everything is sized for desk-scale inputs and is
cross-checked against brute-force oracles in the test suite.
"""

__version__ = "0.1.0"
