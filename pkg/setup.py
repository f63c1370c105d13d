from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiled kernels bit-identical to the
# pure-Python backend (no FMA fusion); do not add -ffast-math.
extensions = [
    Extension(
        "roughseg._kernels._native",
        ["src/roughseg/_kernels/_native.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
