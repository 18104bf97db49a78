"""Build hooks for the optional compiled ensemble kernel.

The package is pure python plus one hot loop (the Euler-Maruyama ensemble
stepper).  If Cython and a C compiler are available the loop is compiled as
``collapsim._ensemble_cy``; otherwise the build falls back to the numpy twin
in ``collapsim._ensemble_np`` and everything still works.

``-ffp-contract=off`` keeps the compiled kernel from fusing multiply-adds so
both backends produce near bit-identical trajectories (tested).
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "collapsim._ensemble_cy",
                ["src/collapsim/_ensemble_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
