"""Exact parameter-level theta correspondence for torus data over p-adic
fields, with a finite Weil-representation oracle for the rank-one case."""

__version__ = "0.1.0"
