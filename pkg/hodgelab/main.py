"""Console entry for hodgelab: exact checks on K3-type Hodge structures and their brilliant families.

Installed as the ``hodgelab`` script; ``python -m hodgelab.main`` runs the same click group.
"""

from hodgelab.cli import cli


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
