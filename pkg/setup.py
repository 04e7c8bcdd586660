import os

from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the pure
# implementations in profusion._kernels._pure if the extension is absent
# or if PROFUSION_PURE is set at import time.
ext_modules = []
if not os.environ.get("PROFUSION_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "profusion._kernels._core",
                    ["src/profusion/_kernels/_core.pyx"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
