"""Build hooks: compile the step-kernel extension when Cython is available.

The package is fully functional without the extension (a numpy fallback
is selected at import time), so any build failure here downgrades to a
pure-python install instead of aborting.
"""

import os

from setuptools import setup

ext_modules = []
cmdclass = {}

if not os.environ.get("CNLSLAB_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
        from setuptools.command.build_ext import build_ext

        class OptionalBuildExt(build_ext):
            def run(self):
                try:
                    super().run()
                except Exception as exc:  # missing compiler etc.
                    print(f"skipping extension build ({exc}); pure-python fallback will be used")

            def build_extension(self, ext):
                try:
                    super().build_extension(ext)
                except Exception as exc:
                    print(f"skipping {ext.name} ({exc}); pure-python fallback will be used")

        ext_modules = cythonize(
            [
                Extension(
                    "cnlslab._stepper",
                    sources=["src/cnlslab/_stepper.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass["build_ext"] = OptionalBuildExt
    except ImportError:
        pass

setup(ext_modules=ext_modules, cmdclass=cmdclass)
