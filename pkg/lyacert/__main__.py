import sys

from lyacert.cli import main

sys.exit(main())
