"""Build script for the optional compiled extractor kernel.

The package works without the extension (a numpy kernel is selected at
import time), so a missing compiler or Cython must not fail the install.
Set QRNGKIT_PURE_PYTHON=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(f"warning: skipping compiled extractor kernel ({exc}); "
              f"the numpy fallback will be used")


def extensions():
    if os.environ.get("QRNGKIT_PURE_PYTHON"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython unavailable; building without the compiled kernel")
        return []
    return cythonize(
        [
            Extension(
                "qrngkit.extractor._kernel_cy",
                ["src/qrngkit/extractor/_kernel_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
