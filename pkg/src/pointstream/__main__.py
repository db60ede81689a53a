import sys

from pointstream.cli import main

sys.exit(main())
