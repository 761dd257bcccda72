"""Fine-scale statistics of sequences modulo one and affine lattice directions."""

__version__ = "0.1.0"
