import sys

from perfsum.cli import main

sys.exit(main())
