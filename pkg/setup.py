from setuptools import Extension, setup
from Cython.Build import cythonize

ext_modules = [
    Extension(
        "vidcurate.kernels._native",
        ["src/vidcurate/kernels/_native.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
