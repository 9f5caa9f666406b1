from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the pure-Python
# twin (blockeq._kernels_py) when the extension is unavailable.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("blockeq._kernels_c", ["src/blockeq/_kernels_c.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
