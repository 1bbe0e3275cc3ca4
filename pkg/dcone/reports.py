"""
Report documents emitted by the command line, checked against report_schema.json.
"""

import json
from pathlib import Path

from jsonschema import validate
from jsonschema.exceptions import ValidationError

from dcone import formats

SUCCESS = "success"
PASS = "pass"
FAIL = "fail"
ERROR = "error"

MAX_TEXT_ITEMS = 8


def load_report_schema():
    with open(Path(__file__).parent / "report_schema.json") as f:
        return json.load(f)


def check_status(passed):
    return PASS if passed else FAIL


def build_report(command, status, **sections):
    """
    :param str command: Subcommand name.
    :param str status: 'success', 'pass', 'fail' or 'error'.
    :return: Report with JSON-ready values.
    :rtype: dict
    """
    report = {"command": command, "status": status}
    report.update(sections)
    return json.loads(formats.dumps(report))


def error_report(command, message):
    return {"command": command, "status": ERROR, "message": str(message)}


def validate_report(report):
    """
    :raises ValueError: If the report does not conform to the report schema.
    """
    try:
        validate(report, load_report_schema())
    except ValidationError as e:
        raise ValueError("The generated report did not conform to the schema: {}".format(e.message))
    return report


def write_report(path, report):
    """Validate, then write as indented JSON."""
    return formats.write_json(path, validate_report(report))


def _text_lines(value, prefix=""):
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _text_lines(item, "{}.{}".format(prefix, key) if prefix else str(key))
    elif isinstance(value, list):
        if len(value) > MAX_TEXT_ITEMS or any(isinstance(item, (dict, list)) for item in value):
            if all(isinstance(item, dict) and "name" in item for item in value):
                for item in value:
                    mark = "PASS" if item.get("passed", True) else "FAIL"
                    yield "{}: [{}] {}".format(prefix, mark, item["name"])
            else:
                yield "{}: [{} items]".format(prefix, len(value))
        else:
            yield "{}: {}".format(prefix, ", ".join(str(item) for item in value))
    else:
        yield "{}: {}".format(prefix, value)


def render(report, as_json=False):
    """
    :param dict report: A built report.
    :param bool as_json: Emit the JSON document instead of text.
    :rtype: str
    """
    if as_json:
        return formats.dumps(report)
    if report["status"] == ERROR:
        return "Error: {}".format(report["message"])
    body = {key: value for key, value in report.items() if key not in ("command", "status")}
    lines = ["dcone {}: {}".format(report["command"], report["status"].upper())]
    lines.extend("  " + line for line in _text_lines(body))
    return "\n".join(lines)
