import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # sdist without Cython: the pure-Python core is used
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("SEPSIM_NO_EXT"):
    ext = Extension(
        "sepsim._core",
        ["src/sepsim/_core.pyx"],
        include_dirs=[np.get_include()],
        language="c++",
        extra_compile_args=["-O3"],
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
