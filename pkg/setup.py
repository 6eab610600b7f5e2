"""Build script: compiles the Monte Carlo hot loop as a C extension.

The package imports fine without the extension (a NumPy fallback is selected
at runtime), so failures here degrade performance, not functionality.
"""
import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "diffint.mc._kernel",
        ["src/diffint/mc/_kernel.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
