import shutil

from risbeam.utils.string_utils import format_string

# ANSI escapes by severity name
COLOR = {
    "RED": '\033[31m',       # errors
    "GREEN": '\033[32m',     # results
    "YELLOW": '\033[33m',    # warnings
    "BLUE": '\033[34m',      # headers
    "RESET": '\033[0m',
}

# Severities still printed when quiet
ALWAYS_SHOWN = {"RED", "GREEN"}

_quiet = False


def set_quiet(quiet=True):
    """Silence progress output (sweeps, tests). Errors and results still print."""
    global _quiet
    _quiet = bool(quiet)


def get_terminal_width(fallback=80):
    return shutil.get_terminal_size((fallback, 24)).columns


def print_table(rows, columns=None, title=None):
    """
    Print a list of dicts as an aligned table, one column per key.
    Cells wider than the terminal allows are cut with '...'.
    """
    if not rows:
        print_("Nothing to show.", "RED")
        return

    columns = columns or list(rows[0].keys())
    cells = [[str(r.get(c, '')) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]

    limit = max(get_terminal_width() // max(len(columns), 1) - 2, 8)
    widths = [min(w, limit) for w in widths]

    def render(values):
        return "  ".join(format_string(v, limit=w).ljust(w) for v, w in zip(values, widths))

    header = render(columns)
    body = [header, "-" * len(header)] + [render(row) for row in cells]

    if title:
        print_(title, "BLUE")
    print("\n" + "\n".join(body))


def print_(text="", color=None, return_text=False):
    """
    Print a `[*]`-prefixed status line, coloured by severity.

    Leading newlines are printed bare before the prefix. While quiet, only
    RED and GREEN lines are shown; `return_text` returns the line instead.
    """
    severity = (color or "").upper()
    shown = not (_quiet and severity not in ALWAYS_SHOWN)

    text = str(text)
    stripped = text.lstrip('\n')
    blank_lines = len(text) - len(stripped)

    line = f"[*] {stripped}"
    if severity in COLOR:
        line = f"{COLOR[severity]}{line}{COLOR['RESET']}"

    if return_text:
        return line
    if shown:
        print("\n" * blank_lines + line)
