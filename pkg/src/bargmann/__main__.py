import sys

from bargmann.cli import main

sys.exit(main())
