import os

import numpy as np
from setuptools import Extension, setup

extensions = []
if not os.environ.get("LLMFS_NO_EXT"):
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "llmfs._kernels._ctree",
                ["src/llmfs/_kernels/_ctree.pyx"],
                include_dirs=[np.get_include()],
                # fp-contract off keeps results bit-identical to the numpy fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
