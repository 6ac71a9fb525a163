from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sagnacbell._kernels",
                ["src/sagnacbell/_kernels.pyx"],
                # keep IEEE semantics: seeded Poisson draws must match the Python fallback
                extra_compile_args=["-O2", "-fno-fast-math", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
