"""Optional build of the compiled kernel extension.

The package is fully functional without the extension (a vectorized numpy
fallback is selected at import time).  When Cython and a C compiler are
available, ``python setup.py build_ext --inplace`` (or a normal pip build)
produces wedgecmc._kernels._speedups, which fuses the hot per-node operator
and Jacobian assembly loops.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "wedgecmc._kernels._speedups",
                ["src/wedgecmc/_kernels/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython available: ship pure-python fallback only.
    ext_modules = []

setup(ext_modules=ext_modules)
