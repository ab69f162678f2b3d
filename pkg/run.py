import sys

from rotalg.main import main


if __name__ == "__main__":
    sys.exit(main())
