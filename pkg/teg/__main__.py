import sys

from teg.runner import main

if __name__ == "__main__":
    sys.exit(main())
