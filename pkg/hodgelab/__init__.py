"""HodgeLab - exact computations with K3-type Hodge structures and their brilliant families."""

__version__ = "0.1.0"
