"""
Simple and robust reader for object files (text or JSON)
"""
import json
from pathlib import Path

from dgmod import dg_from_dict, parse_dg
from mf import mf_from_dict, parse_mf, split_sections
from polyring import MFError, ParseError, parse_ring_map, ring_map_from_dict
from reduce import certificate_from_dict, parse_certificate, parse_trace, trace_from_dict
from scenario import load_scenario, scenario_from_dict

TEXT_READERS = {
    "mf": parse_mf,
    "dg": parse_dg,
    "scenario": load_scenario,
    "certificate": parse_certificate,
    "trace": parse_trace,
    "map": parse_ring_map,
}

JSON_READERS = {
    "mf": mf_from_dict,
    "dg": dg_from_dict,
    "scenario": scenario_from_dict,
    "certificate": certificate_from_dict,
    "trace": trace_from_dict,
    "map": ring_map_from_dict,
}


def detect_kind(text: str) -> str:
    """Guess the object kind of a text file from its section headers."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(stripped).get("type", "mf")
        except (ValueError, AttributeError):
            raise ParseError("file looks like JSON but does not parse") from None
    keys = set(split_sections(text))
    if "steps" in keys:
        return "trace"
    if "source.ring" in keys:
        return "certificate"
    if "base" in keys:
        return "dg"
    if "nu" in keys or "y" in keys:
        return "scenario"
    if "source" in keys and "target" in keys:
        return "map"
    return "mf"


def read_text(path) -> str:
    """Read a file as UTF-8 with the BOM stripped"""
    text = Path(path).read_bytes().decode("utf-8")
    if text.startswith("\ufeff"):
        text = text[1:]
    return text


def parse_object(text: str, expected=None):
    """Parse text or JSON into an object, checking the kind when `expected` is given"""
    kind = detect_kind(text)
    if kind not in TEXT_READERS:
        raise ParseError(f"unknown object type {kind!r}")
    if expected is not None and kind not in ((expected,) if isinstance(expected, str) else tuple(expected)):
        raise ParseError(f"expected a {expected} file, got a {kind} file")
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except ValueError as exc:
            raise ParseError(f"bad JSON: {exc}") from None
        return JSON_READERS[kind](data)
    return TEXT_READERS[kind](text)


def read_object_file(path, expected=None):
    """
    Read any object file with maximum compatibility
    Returns: (object, error_message)
    """
    try:
        text = read_text(path)
    except FileNotFoundError:
        return None, f"File not found: {path}"
    except UnicodeDecodeError:
        return None, f"Cannot decode {path} as UTF-8"
    except OSError as e:
        return None, f"File reading error: {e}"

    if not text.strip():
        return None, f"{path} is empty"

    try:
        return parse_object(text, expected), None
    except ParseError as e:
        return None, f"{path}: {e}"
    except MFError as e:
        return None, f"{path}: {e}"
