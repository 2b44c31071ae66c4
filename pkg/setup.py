"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a pure
numpy/python fallback is selected at import time); building it makes
the BFS / four-point kernels 20-100x faster.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("BUNDLEKIT_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "bundlekit._kernels._ckern",
                    ["src/bundlekit/_kernels/_ckern.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
