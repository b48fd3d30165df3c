"""Command-line tool functionality.

Parses arguments and determines which tool should be called.

"""

import sys
import argparse
import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Optional
import importlib

from delaunaylab.spectral import consts
from delaunaylab.spectral.exceptions import DelaunayLabError


# New tools should be added to this list, with the package implementing them.
TOOL_NAME_LIST = ['orbit', 'jacobi', 'bands', 'indicial', 'pohozaev',
                  'relindex', 'moduli-table', 'verify']
TOOL_PACKAGE = {tool_name: 'spectral' for tool_name in TOOL_NAME_LIST}


class AbstractCLI(ABC):
    """Abstract class for delaunaylab command-line interface tools.

    Note:
        Tools are called from the command line using
        $ delaunaylab TOOL-NAME --optional_arg1 optional_val1 ...

    """

    @abstractmethod
    def get_name(self) -> str:
        """Return the command-line name of the tool."""
        pass

    @abstractmethod
    def validate_args(self, parser: argparse):
        """Do tool-specific argument validation, returning args."""
        pass

    @abstractmethod
    def run(self, args) -> int:
        """Run the tool using the parsed arguments, returning an exit code."""
        pass


def generate_cli_dictionary() -> Dict[str, AbstractCLI]:
    cli_dict = {}
    for tool_name in TOOL_NAME_LIST:
        # Note: the package must have a file named cli.py containing a class
        # named CLI, which implements AbstractCLI.
        module_cli = importlib.import_module(f"delaunaylab.{TOOL_PACKAGE[tool_name]}.cli")
        cli_dict[tool_name] = module_cli.CLI(tool_name)

    return cli_dict


def get_populated_argparser() -> argparse.ArgumentParser:
    # Set up argument parser.
    parser = argparse.ArgumentParser(
        prog="delaunaylab",
        description="delaunaylab computes Delaunay solutions of the singular "
                    "Yamabe problem on S^n minus points, the spectral theory "
                    "of their linearization, and their Pohozaev invariants.")

    # Declare the existence of sub-parsers.
    subparsers = parser.add_subparsers(
        title="sub-commands",
        description="valid delaunaylab commands",
        dest="tool")

    # Each package adds the arguments of all of its tools at once.
    for package in sorted(set(TOOL_PACKAGE.values())):
        module_argparse = importlib.import_module(f"delaunaylab.{package}.argparse")
        subparsers = module_argparse.add_subparser_args(subparsers)

    return parser


def run_cli(argv: List[str], parser: Optional[argparse.ArgumentParser] = None) -> int:
    """Parse, validate and run one command, returning its exit code.

    Invalid input exits with EXIT_USAGE before any computation, a failed
    computation with EXIT_COMPUTATION, and a failed acceptance suite with
    EXIT_VERIFY_FAILED.

    """

    parser = get_populated_argparser() if parser is None else parser
    cli_dict = generate_cli_dictionary()

    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return consts.EXIT_OK if error.code == 0 else consts.EXIT_USAGE

    if args.tool is None:
        parser.print_help()
        return consts.EXIT_USAGE

    # Validate arguments.
    try:
        args = cli_dict[args.tool].validate_args(args)
    except (AssertionError, ValueError, DelaunayLabError) as error:
        sys.stderr.write(f"delaunaylab {args.tool}: invalid input: {error}\n")
        return consts.EXIT_USAGE

    # Run the tool.
    try:
        return cli_dict[args.tool].run(args)
    except DelaunayLabError as error:
        logging.error(f"{type(error).__name__}: {error}")
        return consts.EXIT_COMPUTATION


def main():
    """Parse command-line arguments and run specified tool.

    Note: Does not take explicit input arguments, but uses sys.argv inputs
    from the command line.

    """

    if len(sys.argv) > 1:
        sys.exit(run_cli(sys.argv[1:]))

    else:

        get_populated_argparser().print_help()
