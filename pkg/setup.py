"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); building it just makes the Monte Carlo sampler and
the saddle-point grid scan several times faster.  Set CYINS_PURE=1 to skip
the extension entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(f"warning: building the cyins._kernels extension failed ({exc}); "
              "the pure NumPy backend will be used", file=sys.stderr)


def make_ext_modules():
    if os.environ.get("CYINS_PURE"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    if sys.platform == "win32":
        # /fp:strict disables contraction so the compiled kernels stay
        # bit-identical to the NumPy fallback.
        compile_args = ["/O2", "/fp:strict"]
    else:
        compile_args = ["-O3", "-ffp-contract=off", "-fno-fast-math"]
    ext = Extension(
        "cyins._kernels",
        ["src/cyins/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=compile_args,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(
    ext_modules=make_ext_modules(),
    cmdclass={"build_ext": optional_build_ext},
)
