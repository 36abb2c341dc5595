import sys

from coblelab.cli import main

sys.exit(main())
