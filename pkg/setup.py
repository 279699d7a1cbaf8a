import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TAPF_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("tapf._kernels", ["src/tapf/_kernels.pyx"], include_dirs=[np.get_include()])],
            language_level="3str",
        )

setup(ext_modules=ext_modules)
