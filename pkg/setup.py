import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "dbmlab._kernels._core",
        ["src/dbmlab/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,  # fall back to the pure-numpy kernels if the build fails
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
