from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the pure-Python fallback takes over at import time
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "poincare_gap._kernels",
                ["src/poincare_gap/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
