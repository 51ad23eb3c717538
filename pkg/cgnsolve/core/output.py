# Standardized console status lines for the cgn-solve CLI
import sys

from colorama import Fore, Style, init

# strip=None lets colorama drop escape codes when the stream is not a terminal
init(strip=None)


def _paint(color: str, prefix: str) -> str:
    return f"{color}{prefix}{Style.RESET_ALL}"


def print_success(msg: str):
    """Print a success message to stdout."""
    print(f"{_paint(Fore.GREEN, '[OK]')} {msg}")


def print_error(msg: str):
    """Print an error message to stderr."""
    print(f"{_paint(Fore.RED, '[ERROR]')} {msg}", file=sys.stderr)


def print_warning(msg: str):
    """Print a warning message to stderr."""
    print(f"{_paint(Fore.YELLOW, '[WARNING]')} {msg}", file=sys.stderr)


def print_info(msg: str):
    """Print an informational message to stdout."""
    print(f"{_paint(Fore.BLUE, '[INFO]')} {msg}")
