"""Build hooks: compile the kernel extension when Cython is available.

The extension is optional; the package falls back to the pure-Python
kernels (same results, slower) if the build is skipped or fails.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension(
            "certcap._kernels._speedups",
            ["src/certcap/_kernels/_speedups.pyx"],
            extra_compile_args=["-O2"],
        )],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
