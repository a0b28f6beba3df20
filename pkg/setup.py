"""Build script: compiles the optional overlap-counting extension.

The package is pure Python plus one optional Cython kernel for the hot
loop in the dyadic-region overlap audit.  If Cython or a C compiler is
unavailable the build silently falls back to the NumPy implementation
selected at import time in ``dispersive_lab.dyadic``.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dispersive_lab._overlap_cy",
                ["src/dispersive_lab/_overlap_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
