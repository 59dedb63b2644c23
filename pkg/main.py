"""
Latent Cluster - deep unsupervised clustering of handwritten digits
Main entry point for the command-line interface
"""

import json
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from src.cli import (
    build_parser,
    cmd_compare,
    cmd_evaluate,
    cmd_inspect_checkpoint,
    cmd_train,
    cmd_visualize,
    config_overrides,
)
from src.utils.config import load_run_config
from src.utils.errors import LatentClusterError
from src.utils.logger import setup_logger

# Load environment variables
load_dotenv()

# Setup logging
logger = setup_logger()


def run_command(args) -> int:
    """Resolve the configuration and dispatch one subcommand"""
    config = load_run_config(getattr(args, "config", None), config_overrides(args))
    setup_logger(config.log_level, Path(config.output_dir) / "logs" / f"{args.command}.log")
    logger.info(f"Running '{args.command}' with seed {config.seed}")

    if args.command == "train":
        result = cmd_train(config, phase1_only=args.phase1_only)
        print(json.dumps({k: v for k, v in result.items() if k != "processing_time"}, indent=2))
    elif args.command == "evaluate":
        report = cmd_evaluate(config, args.checkpoint, args.method)
        print(report.to_json(), end="")
    elif args.command == "visualize":
        files = cmd_visualize(config, args.checkpoint)
        print(json.dumps({name: str(path) for name, path in files.items()}, indent=2))
    elif args.command == "inspect-checkpoint":
        summary = cmd_inspect_checkpoint(args.path, config.latent_dim)
        print(json.dumps(summary, indent=2))
    elif args.command == "compare":
        table = cmd_compare(config, args.checkpoint)
        print(table.to_string(index=False))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point

    Returns:
        Exit code: 0 success, 2 configuration error, 3 data error,
        4 numeric abort, 1 anything else
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        return run_command(args)
    except LatentClusterError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure in '{args.command}': {str(e)}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
