# Command-line surface
from .commands import (
    METHODS,
    cmd_compare,
    cmd_evaluate,
    cmd_inspect_checkpoint,
    cmd_train,
    cmd_visualize,
    method_features,
)
from .parser import PROG, build_parser, config_overrides

__all__ = [
    "METHODS",
    "PROG",
    "build_parser",
    "cmd_compare",
    "cmd_evaluate",
    "cmd_inspect_checkpoint",
    "cmd_train",
    "cmd_visualize",
    "config_overrides",
    "method_features",
]
