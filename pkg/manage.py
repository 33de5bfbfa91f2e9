#!/usr/bin/env python
"""Entry point of the tagging-latency toolkit.

    python manage.py migrate          # run ledger and preferences tables
    python manage.py model --config run.cfg
    python manage.py analyze trace.csv --fs 1000
    python manage.py test latency
"""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the project first (`uv sync` or "
            "`pip install -e .`) and activate its virtual environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
