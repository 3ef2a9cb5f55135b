"""Pull an HTML document out of raw model output.

Models wrap code in prose and markdown fences; the benchmark only cares about
the document itself. Preference order: largest html-tagged fence, then largest
untagged fence that contains an ``<html`` tag, then the whole output if it is
itself a bare document. ``None`` means no candidate was found.
"""

from __future__ import annotations

import re
from typing import Optional

_FENCE_RE = re.compile(r"```([A-Za-z0-9_+-]*)[ \t]*\r?\n(.*?)```", re.DOTALL)
_DOC_RE = re.compile(r"<!doctype\s+html|<html[\s>]", re.IGNORECASE)


def extract_code(raw_output: str) -> Optional[str]:
    tagged: list[str] = []
    untagged_doc: list[str] = []
    for match in _FENCE_RE.finditer(raw_output):
        lang = match.group(1).lower()
        body = match.group(2).strip()
        if not body:
            continue
        if lang in ("html", "htm"):
            tagged.append(body)
        elif lang == "" and _DOC_RE.search(body):
            untagged_doc.append(body)
    for pool in (tagged, untagged_doc):
        if pool:
            return max(pool, key=len)
    stripped = raw_output.strip()
    if stripped and _DOC_RE.search(stripped):
        return stripped
    return None
