"""Width analysis, DNNF compilation and re-encoding of CNF formulas."""

__version__ = "0.1.0"
