import os

import numpy
from setuptools import Extension, setup

ext_modules = []
_pyx = "src/ptwork/kernels/_core.pyx"
if os.path.exists(_pyx):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ptwork.kernels._core",
                    [_pyx],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # Cython unavailable: install with the pure-python kernels only.
        pass

setup(ext_modules=ext_modules)
