from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mosaic_qaoa.kernels._statevec",
                ["src/mosaic_qaoa/kernels/_statevec.pyx"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except ImportError:
    # No Cython: the package still works on the numpy fallback backend.
    ext_modules = []

setup(ext_modules=ext_modules)
