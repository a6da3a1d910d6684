"""Zero-shot LLM feature scoring next to classical feature selection, with a benchmark grid."""

__version__ = "0.1.0"

from llmfs._kernels import BACKEND as KERNEL_BACKEND  # noqa: E402
from llmfs.data import Dataset, SynthSpec, generate_synthetic, load_csv, split, write_csv  # noqa: E402
from llmfs.selection import ScoreVector, SelectionResult, project, top_k  # noqa: E402

__all__ = [
    "KERNEL_BACKEND",
    "Dataset",
    "ScoreVector",
    "SelectionResult",
    "SynthSpec",
    "generate_synthetic",
    "load_csv",
    "project",
    "split",
    "top_k",
    "write_csv",
]
