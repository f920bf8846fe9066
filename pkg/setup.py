"""Build the optional compiled kernel.

The package works without it (``rotom._kernels_py`` is used instead), so a
missing Cython/compiler downgrades to a pure-Python install rather than
failing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("ROTOM_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "rotom._ckernels",
                    ["src/rotom/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
