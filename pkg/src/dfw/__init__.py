"""Distance-function kernels, multiscale series, transforms, diffusion solves and ridgelet fits."""

__version__ = "0.1.0"
