import sys

from app.cli.router import dispatch


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
