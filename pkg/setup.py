import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# BITORDER_PORTABLE=1 drops host-specific instruction sets for redistributable builds
arch = [] if os.environ.get("BITORDER_PORTABLE") else ["-march=native"]

ext_modules = []
if cythonize is not None and not os.environ.get("BITORDER_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "bitorder._kernels",
                ["src/bitorder/_kernels.pyx"],
                extra_compile_args=["-O3", *arch, "-fopenmp"],
                extra_link_args=["-fopenmp"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
