"""Build script: compiles the optional Cython physics core.

The package is fully functional without the extension (a pure-numpy kernel
is selected at import time); the extension exists because the 1 kHz inner
simulation loop dominates runtime for training and navigation runs.
"""

import os

from setuptools import Extension, setup

try:
    if not os.path.exists("src/slithernav/_core.pyx"):
        raise ImportError
    from Cython.Build import cythonize
    import numpy

    ext_modules = cythonize(
        [
            Extension(
                "slithernav._core",
                ["src/slithernav/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
