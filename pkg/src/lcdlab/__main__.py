import sys

from lcdlab.cli import main

sys.exit(main())
