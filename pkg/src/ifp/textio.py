"""Reader/writer helpers for the structured text formats used on disk.

The format is deliberately simple: optional `[section]` headers, `key = value`
lines, bare data rows inside tabular sections, `#` comments, blank lines
ignored.  Section names may be dotted (`[inner.inner]`) to express nesting.
"""
from __future__ import annotations


def read_sections(text: str) -> dict[str, list[str]]:
    """Split a document into sections, preserving raw data lines.

    Returns a dict mapping section name to its list of non-comment lines.
    Lines before the first header go under the key "".
    """
    sections: dict[str, list[str]] = {"": []}
    current = ""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, [])
            continue
        sections[current].append(line)
    return sections


def parse_kv(lines: list[str]) -> dict[str, str]:
    """Parse `key = value` lines into a dict (values kept as strings)."""
    out: dict[str, str] = {}
    for line in lines:
        if "=" not in line:
            raise ValueError(f"expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def parse_floats(value: str) -> list[float]:
    """Whitespace-separated float list."""
    return [float(tok) for tok in value.split()]


def parse_matrix(value: str) -> list[list[float]]:
    """Rows separated by ';', entries by whitespace."""
    return [parse_floats(row) for row in value.split(";") if row.strip()]


def fmt(x: float) -> str:
    """Decimal formatting with 17 significant digits (round-trips doubles)."""
    return format(float(x), ".17g")


def fmt_vec(v) -> str:
    return " ".join(fmt(x) for x in v)


def fmt_matrix(m) -> str:
    return " ; ".join(fmt_vec(row) for row in m)
