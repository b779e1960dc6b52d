"""Build script: compiles the correlation kernel extension when a toolchain
is available, otherwise installs with the pure numpy fallback."""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Never fail the install over the optional compiled kernel."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  f"smallprint will use the python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: skipping {ext.name} ({exc}); "
                  f"smallprint will use the python backend")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "smallprint._zncc_cy",
        ["src/smallprint/_zncc_cy.pyx"],
        extra_compile_args=["-O3", "-ffast-math", "-funroll-loops"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
