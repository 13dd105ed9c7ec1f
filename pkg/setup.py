"""Build script for the optional compiled kernel extension.

The package works without the extension: vascor._kernels falls back to a
pure NumPy/SciPy implementation when the compiled module is absent.  The
extension is therefore marked optional so that a missing C toolchain
degrades the install instead of failing it.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "vascor._kernels._core",
                ["src/vascor/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
                language="c",
                optional=True,
            )
        ],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
