"""Optional Cython build of ``polyinv._ckernels``.

The extension is an accelerator only: if Cython, the gmpy2 headers or a C
compiler are missing, the build warns and the package falls back to
``polyinv._kernels_py`` at import time.
"""

import glob
import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            print(f"warning: compiled kernels not built ({exc}); using the pure-Python backend",
                  file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using the pure-Python backend",
                  file=sys.stderr)


def gmp_link_args(gmpy2_dir):
    """Link against the very GMP that gmpy2 loaded.

    Binary gmpy2 wheels bundle a private libgmp; coefficients allocated by it
    must be resized by the same library, so the system copy cannot be used.
    """
    bundled = sorted(glob.glob(os.path.join(os.path.dirname(gmpy2_dir), "gmpy2.libs", "libgmp*.so*")))
    if bundled:
        return [bundled[0], "-Wl,-rpath," + os.path.dirname(bundled[0])]
    return ["-lgmp"]


def extensions():
    if os.environ.get("POLYINV_NO_EXTENSION", "") not in ("", "0"):
        return []
    try:
        import gmpy2
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    gmpy2_dir = os.path.dirname(gmpy2.__file__)
    link = gmp_link_args(gmpy2_dir)
    ext = Extension(
        "polyinv._ckernels",
        ["src/polyinv/_ckernels.pyx"],
        include_dirs=[gmpy2_dir],
        extra_compile_args=["-O3"],
        extra_link_args=link,
    )
    try:
        return cythonize([ext], include_path=[gmpy2_dir], language_level=3, quiet=True)
    except Exception as exc:  # noqa: BLE001
        print(f"warning: cythonize failed ({exc}); using the pure-Python backend", file=sys.stderr)
        return []


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
