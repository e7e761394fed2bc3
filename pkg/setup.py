"""Build hook for the optional compiled kernels.

The Cython extension is built when Cython and a C compiler are available.
Otherwise the package installs without it and falls back to the pure
Python kernels at import time.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("QCUTSTACK_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        extensions = [
            Extension(
                "qcutstack._kernels",
                ["src/qcutstack/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
