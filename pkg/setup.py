"""Build script for the optional compiled kernel core.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the extension only makes the hot convolution
kernels fast enough for CPU training. Build failures are therefore
non-fatal.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "sincres._core",
                ["src/sincres/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=[
                    "-O3",
                    "-march=native",
                    "-funroll-loops",
                    "-ffast-math",
                    "-fopenmp",
                ],
                extra_link_args=["-fopenmp"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # noqa: BLE001 - any build-chain problem means "pure python"
    print(f"sincres: compiled core disabled ({exc}); using numpy fallback",
          file=sys.stderr)

setup(ext_modules=ext_modules)
