"""
Utility functions for fractrans
Parsing and formatting helpers shared by the CLI, the sweep manager and the writers
"""

from fractions import Fraction

from errors import ConfigurationError


def format_time(seconds):
    """
    Format seconds into a readable time string

    Args:
        seconds: Time in seconds (float or int)

    Returns:
        str: Formatted time string like "1h 23m", "5m 42s" or "830ms"
    """
    if seconds is None:
        return "N/A"

    if seconds < 1.0:
        return f"{seconds * 1000:.0f}ms"

    hours = int(seconds // 3600)
    minutes = int((seconds % 3600) // 60)
    secs = int(seconds % 60)

    if hours > 0:
        return f"{hours}h {minutes}m"
    else:
        return f"{minutes}m {secs}s"


def parse_rational(text):
    """
    Parse an interface location given as "p/q" (or an exact decimal like "0.75")

    Args:
        text: String or Fraction

    Returns:
        Fraction: b in lowest terms
    """
    if isinstance(text, Fraction):
        return text
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"cannot read interface location {text!r}: {exc}") from exc
    return value


def parse_float_list(text):
    """Parse "0.9, 0.99 0.999" into [0.9, 0.99, 0.999]"""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    items = [chunk for chunk in str(text).replace(",", " ").split() if chunk]
    try:
        return [float(item) for item in items]
    except ValueError as exc:
        raise ConfigurationError(f"cannot read number list {text!r}") from exc


def parse_int_list(text):
    """Parse "4,5,6" or "4-9" into a list of ints"""
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text).strip()
    if "-" in text and "," not in text and " " not in text:
        lo, hi = text.split("-", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError as exc:
            raise ConfigurationError(f"cannot read level range {text!r}") from exc
    items = [chunk for chunk in text.replace(",", " ").split() if chunk]
    try:
        return [int(item) for item in items]
    except ValueError as exc:
        raise ConfigurationError(f"cannot read integer list {text!r}") from exc


def format_float(value, fmt="%.17g"):
    """CSV float formatting; keeps round-trip precision"""
    if value is None:
        return ""
    return fmt % value
