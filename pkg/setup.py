"""Build script: compiles the optional simplex pivot kernel.

The package works without the compiled extension (a NumPy fallback is
selected at import time), so any failure here is downgraded to a warning.
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
                "tampkit.solver._pivot_cy",
                ["src/tampkit/solver/_pivot_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build host
    print(f"warning: compiled pivot kernel skipped ({exc}); "
          "pure-Python kernel will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
