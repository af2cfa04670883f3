import sys

from ordifun.cli import main

sys.exit(main())
