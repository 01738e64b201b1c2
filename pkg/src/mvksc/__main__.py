import sys

from mvksc.cli import main

sys.exit(main())
