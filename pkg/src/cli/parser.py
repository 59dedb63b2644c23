"""
Argument parser; one flag per RunConfig key, generated from the schema
"""

import argparse
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple, Union, get_args, get_origin

from ..utils.config import RunConfig
from .commands import METHODS

PROG = "latent-cluster"


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {value!r}")


def _flag_type(annotation: Any) -> Tuple[Callable[[str], Any], Optional[List[str]]]:
    if get_origin(annotation) is Literal:
        return str, [str(choice) for choice in get_args(annotation)]
    if get_origin(annotation) is Union:
        annotation = next(arg for arg in get_args(annotation) if arg is not type(None))
    if annotation is bool:
        return _parse_bool, None
    return annotation, None


def _config_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("run configuration")
    group.add_argument(
        "--config", type=Path, default=argparse.SUPPRESS,
        help="Flat JSON file of configuration keys; flags override it"
    )
    for name, field in RunConfig.model_fields.items():
        convert, choices = _flag_type(field.annotation)
        group.add_argument(
            "--" + name.replace("_", "-"),
            dest=name,
            type=convert,
            choices=choices,
            default=argparse.SUPPRESS,
            help=f"{field.description} (default: {field.default})",
        )
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with the train, evaluate, visualize, inspect-checkpoint and compare subcommands"""
    config_flags = _config_flags()
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Deep unsupervised clustering of handwritten digits with a triplet-trained autoencoder",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    train = commands.add_parser("train", parents=[config_flags], help="Run Phase 1 and Phase 2 training")
    train.add_argument("--phase1-only", action="store_true", help="Stop after reconstruction training")
    train.add_argument("--epochs", type=int, help="Epochs for every phase (overrides both epoch keys)")
    train.add_argument("--subset", type=int, help="Train on the first N training images")

    evaluate = commands.add_parser("evaluate", parents=[config_flags], help="Cluster the test set and report metrics")
    evaluate.add_argument("--checkpoint", type=Path, help="Checkpoint (required for triplet_ae)")
    evaluate.add_argument("--method", choices=METHODS, default="triplet_ae", help="Features to cluster")
    evaluate.add_argument("--subset", type=int, help="Evaluate on the first N test images")
    evaluate.add_argument(
        "--sample-size", type=int, help="Seeded silhouette subsample (same as --silhouette-sample-size)"
    )

    visualize = commands.add_parser("visualize", parents=[config_flags], help="t-SNE projection and figures")
    visualize.add_argument("--checkpoint", type=Path, required=True, help="Trained checkpoint")

    inspect = commands.add_parser(
        "inspect-checkpoint", parents=[config_flags], help="Show checkpoint contents and parameter count"
    )
    inspect.add_argument("path", type=Path, help="Checkpoint file")

    compare = commands.add_parser(
        "compare", parents=[config_flags], help="Evaluate all methods and write a comparison table"
    )
    compare.add_argument("--checkpoint", type=Path, required=True, help="Trained checkpoint")
    compare.add_argument("--subset", type=int, help="Evaluate on the first N test images")

    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """RunConfig values given on the command line, including subcommand shorthands"""
    overrides = {name: getattr(args, name) for name in RunConfig.model_fields if hasattr(args, name)}
    if getattr(args, "epochs", None) is not None:
        overrides["phase1_epochs"] = args.epochs
        overrides["phase2_epochs"] = args.epochs
    if getattr(args, "subset", None) is not None:
        overrides["train_subset" if args.command == "train" else "eval_subset"] = args.subset
    if getattr(args, "sample_size", None) is not None:
        overrides["silhouette_sample_size"] = args.sample_size
    return overrides
