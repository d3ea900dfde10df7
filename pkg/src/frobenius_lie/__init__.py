"""Exact computations with Lie rings and finite groups admitting a metacyclic
Frobenius group of automorphisms."""
