import sys

from gdprscan.cli import main

sys.exit(main())
