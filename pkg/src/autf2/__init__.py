"""Exact computation in free groups and their finite metabelian quotients.

Verifies the finite claims behind a congruence subgroup construction for
automorphisms of the free group of rank two, and builds a membership
oracle for the resulting characteristic subgroup K of F(x, y).
"""

__version__ = "0.1.0"
