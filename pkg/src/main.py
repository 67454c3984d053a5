import asyncio
import sys
from typing import List, Optional

from src.cli.context import build_context
from src.cli.routes import build_parser
from src.core.logging import logger, set_level

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one CLI invocation.

    Returns:
        0 on success, 2 for invalid configs or inputs (any ValueError, which
        includes pydantic validation and the toolkit's own errors), 1 for
        anything else.
    """
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    try:
        context = build_context(args)
        logger.info(f"Running '{args.command}' into {context.layout.root}")
        asyncio.run(args.handler(context))
        return EXIT_OK
    except ValueError as e:
        logger.warning(f"Invalid input for '{args.command}': {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"Command '{args.command}' failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
