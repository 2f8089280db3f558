import os

from setuptools import Extension, setup

# The compiled search kernel is optional: without it the package falls back
# to the pure-Python kernel at import time (see kgalign.pathfinder).
extensions = []
if not os.environ.get("KGALIGN_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [Extension("kgalign._bfs", ["src/kgalign/_bfs.pyx"])],
            language_level=3,
        )
    except ImportError:
        extensions = []

setup(ext_modules=extensions)
