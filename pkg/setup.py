"""Builds the optional Cython split-finding kernel.

The package works without the extension (a pure-numpy fallback is selected
at import time); compile with `python setup.py build_ext --inplace` or any
normal pip install.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "ledgerlab._kernels._split",
        ["src/ledgerlab/_kernels/_split.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
