import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "gpelab._core",
                ["src/gpelab/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    # No Cython available: install pure-python only, the kernels package
    # falls back to the numpy implementations at import time.
    extensions = []

setup(ext_modules=extensions)
