import os

from setuptools import setup

# The compiled kernels are optional: the package falls back to the pure-Python
# backend when the extension is absent. Set URCKIT_PURE_PYTHON=1 to skip the
# Cython build entirely.
ext_modules = []
if os.environ.get("URCKIT_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/urckit/_kernels/_fast.pyx"],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
