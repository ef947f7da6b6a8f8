import sys

from macell.cli import main

sys.exit(main())
