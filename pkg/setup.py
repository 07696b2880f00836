import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # sdist without Cython: ship the pure-Python fallback only
    cythonize = None

# Tuned for the build machine by default; wheels meant for other machines
# should set TREEISING_PORTABLE=1.
extra = ["-O3"]
if not os.environ.get("TREEISING_PORTABLE"):
    extra.append("-march=native")

ext_modules = []
if cythonize is not None and not os.environ.get("TREEISING_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "treeising._kernels",
                ["src/treeising/_kernels.pyx"],
                depends=["src/treeising/_kernel_loops.h"],
                include_dirs=[np.get_include(), "src/treeising"],
                extra_compile_args=extra,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
