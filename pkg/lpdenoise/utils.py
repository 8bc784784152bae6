# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

import re
import time


def get_timestamp_ms() -> float:
    return time.perf_counter() * 1000.0


def snake_case(value: str) -> str:
    value = value.strip().replace('-', '_')
    first_underscore = re.sub('(.)([A-Z][a-z]+)', r'\1_\2', value)
    return re.sub('([a-z0-9])([A-Z])', r'\1_\2', first_underscore).lower()


def parse_key_values(text: str):
    """Parse flat `key = value` lines.

    Blank lines and `#` comments are skipped. Yields (line number, key,
    value) with the key normalized to snake case.
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if line == '':
            continue
        if '=' not in line:
            yield lineno, None, line
            continue
        key, value = line.split('=', 1)
        yield lineno, snake_case(key), value.strip()


def format_float(value: float, digits: int) -> str:
    if value == float('inf'):
        return 'inf'
    return '%.*f' % (digits, value)
