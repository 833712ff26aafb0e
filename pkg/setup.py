"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: ``hosi.backend``
falls back to the pure-numpy kernels in ``hosi._kernels_py`` when the
compiled module is absent.  Run ``python benchmarks/bench_kernels.py``
to compare the two.
"""

import warnings

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hosi._kernels",
                sources=["src/hosi/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"skipping compiled kernels ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
