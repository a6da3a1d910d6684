"""Tree-growing kernels.

The compiled ``_ctree`` extension is used when it imports; otherwise the
numpy implementation in ``_pytree`` takes over. Setting ``LLMFS_PURE_PYTHON=1``
forces the fallback. Both produce identical trees for identical inputs.
"""

import os

from llmfs._kernels import _pytree

if os.environ.get("LLMFS_PURE_PYTHON", "") not in ("", "0"):
    _ctree = None
else:
    try:
        from llmfs._kernels import _ctree
    except ImportError:  # extension not built
        _ctree = None

if _ctree is not None:
    grow_tree = _ctree.grow_tree
    apply_tree = _ctree.apply_tree
    BACKEND = "cython"
else:
    grow_tree = _pytree.grow_tree
    apply_tree = _pytree.apply_tree
    BACKEND = "python"

__all__ = ["BACKEND", "apply_tree", "grow_tree"]
