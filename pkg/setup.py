"""Build script.

The compiled kernel (ksums._core) is optional: when Cython or a C compiler is
unavailable the package installs pure-Python only and selects the fallback
backend at import.  Set KSUMS_NO_EXT=1 to skip the extension on purpose.

Floating-point flags matter: contraction is disabled so the compiled kernels
are bit-identical to the pure backend (same libm, same operation order).
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("KSUMS_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ksums._core",
                    ["src/ksums/_core.pyx"],
                    extra_compile_args=[
                        "-O3",
                        "-fno-fast-math",
                        "-ffp-contract=off",
                        # keep separate sin/cos calls: the fused glibc sincos
                        # is 1 ulp off and would break backend bit-identity
                        "-fno-builtin-sin",
                        "-fno-builtin-cos",
                        "-fno-builtin-sincos",
                    ],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
