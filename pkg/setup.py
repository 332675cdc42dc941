"""Build script.  The compiled kernels are optional: if Cython or a C compiler
is unavailable the install proceeds with the pure-numpy fallback, which the
package selects automatically at import time."""

import sys

from setuptools import setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError as exc:
        print(f"kinfp: skipping compiled kernels ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "kinfp._kernels",
        sources=["src/kinfp/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
