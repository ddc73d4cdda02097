from __future__ import annotations

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CONSTRUCTIBLE_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # fallback backend is used at import time
        pass
    else:
        ext_modules = cythonize(
            ["src/constructible/_kernels.pyx"],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
