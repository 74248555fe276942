"""Allow `python -m swiftdeco`"""

import sys

from swiftdeco.main import main

if __name__ == "__main__":
    sys.exit(main())
