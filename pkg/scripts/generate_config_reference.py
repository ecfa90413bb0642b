#!/usr/bin/env python3
"""Regenerate docs/config_keys.md from the configuration schema."""

import pathlib

from qpjumps.core import config_reference

DOCS = pathlib.Path(__file__).resolve().parent.parent / "docs"


def main():
    DOCS.mkdir(exist_ok=True)
    target = DOCS / "config_keys.md"
    target.write_text(config_reference())
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
