"""Build hook for the optional compiled term kernel.

The package is fully functional without the extension; dpkit.kernel falls
back to the pure-Python implementation when the compiled module is absent.
"""

from setuptools import Extension, setup

import os

ext_modules = []
if os.path.exists("src/dpkit/_kernel_cy.pyx"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "dpkit._kernel_cy",
                    ["src/dpkit/_kernel_cy.pyx"],
                    optional=True,
                )
            ],
            language_level="3",
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
