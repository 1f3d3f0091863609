"""Build script for the optional compiled kernel extension.

The package works without the extension: qedge.kernels falls back to the
numpy implementation at import time. The extension is marked optional so
an environment without a C compiler still gets a working install.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "qedge.kernels._core",
        ["src/qedge/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
