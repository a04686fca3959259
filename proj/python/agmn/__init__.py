"""Tree-structured belief propagation over 2D keypoint score maps."""

from ._agmn import (
    AgmnError,
    __version__,
    default_graph_json,
    infer_arrays,
    make_targets_arrays,
    read_tensor,
    write_tensor,
)

__all__ = [
    "AgmnError",
    "__version__",
    "default_graph_json",
    "infer_arrays",
    "make_targets_arrays",
    "read_tensor",
    "write_tensor",
]
