"""Build script: compiles the optional accelerator extension.

The package is pure Python plus one optional Cython extension holding the hot
inner loops (trajectory stepping, batched force accumulation). If Cython or a
C compiler is unavailable the build falls back to the pure-numpy backend; the
package must remain fully functional either way.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Swallow extension build failures; the numpy fallback covers them."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"accelerator extension skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"accelerator extension {ext.name} skipped: {exc}")


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        warnings.warn(f"accelerator extension not built: {exc}")
        return []
    ext = Extension(
        "cslgrav._accel._core",
        sources=["src/cslgrav/_accel/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
