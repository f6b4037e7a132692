import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "z2hubbard._kernels",
        ["src/z2hubbard/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-fcx-limited-range"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
