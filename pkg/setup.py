"""Build script.

The compiled kernel module is optional: when Cython (or a C compiler) is
unavailable, or OUTBURST_NO_EXT=1 is set, the package installs without it
and falls back to the pure-Python kernels at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("OUTBURST_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "outburst._kernels._fast",
                    ["src/outburst/_kernels/_fast.pyx"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
