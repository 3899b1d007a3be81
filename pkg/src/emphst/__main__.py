import sys

from emphst.cli import main

sys.exit(main())
