"""Build script: compiles the optional Cython kernel extension.

Set SISGF_PURE_PYTHON=1 to skip the extension entirely; the package then
runs on the numpy fallback kernels selected at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SISGF_PURE_PYTHON"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "sisgf.backends._ckernels",
                    ["src/sisgf/backends/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
