"""Build script for the optional compiled kernel.

The package is pure Python except for mlmbias.kernels._native, a Cython
module holding the pairwise-comparison inner loop.  The build is marked
optional: without a C compiler the install succeeds and the numpy
fallback is selected at import time.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "mlmbias.kernels._native",
                ["src/mlmbias/kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no -ffast-math: compensated summation needs strict IEEE
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    for ext in extensions:
        ext.optional = True
except ImportError:
    extensions = []

setup(ext_modules=extensions)
