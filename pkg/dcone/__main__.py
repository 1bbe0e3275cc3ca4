"""
Entrypoint for `python -m dcone`.
"""

from dcone.cli import cli


cli()
