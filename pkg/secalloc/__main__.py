import sys

from secalloc.cli import main

sys.exit(main())
