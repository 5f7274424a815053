"""Exact element-order statistics of finite groups and certified
constructions of average-order ratios o(G)/o(H)."""

__version__ = "0.1.0"
