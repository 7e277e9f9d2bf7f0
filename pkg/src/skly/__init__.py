"""Sklyanin algebra representations by elliptic difference operators: special
functions, operator algebra, identity checks and finite theta modules."""
from .specfun import EllipticParams, TruncationPolicy, InvalidParams

__version__ = "0.1.0"
