import sys

from sinrsched.cli import main

sys.exit(main())
