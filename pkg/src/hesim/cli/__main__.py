import sys

from hesim.cli import main

sys.exit(main())
