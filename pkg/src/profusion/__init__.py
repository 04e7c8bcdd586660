"""Fusion systems of finite groups and finite-depth pro-fusion towers."""

from ._kernels import BACKEND as KERNEL_BACKEND  # noqa: F401

__version__ = "0.1.0"
