"""Map console error text onto the failure taxonomy.

Total function: anything unrecognized is ``other``. Patterns cover the error
strings emitted by V8-based browsers; first match across the message list wins,
in taxonomy priority order.
"""

from __future__ import annotations

import re
from typing import Iterable

from ..model import ErrorClass, RenderStatus

_PATTERNS: tuple[tuple[ErrorClass, re.Pattern[str]], ...] = (
    (ErrorClass.SYNTAX_ERROR, re.compile(r"\bSyntaxError\b", re.IGNORECASE)),
    (
        ErrorClass.UNDEFINED_PROPERTY,
        re.compile(
            r"cannot read propert|cannot set propert|reading '[^']*'\)? of (undefined|null)"
            r"|of undefined|is not a function|undefined is not",
            re.IGNORECASE,
        ),
    ),
    (ErrorClass.REFERENCE_ERROR, re.compile(r"\bReferenceError\b", re.IGNORECASE)),
)


def classify_error(console_errors: Iterable[str], status: RenderStatus) -> ErrorClass:
    if status is RenderStatus.TIMEOUT:
        for error_class, pattern in _PATTERNS:
            for message in console_errors:
                if pattern.search(message):
                    return error_class
        return ErrorClass.TIMEOUT
    for error_class, pattern in _PATTERNS:
        for message in console_errors:
            if pattern.search(message):
                return error_class
    return ErrorClass.OTHER
