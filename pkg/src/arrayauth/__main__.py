import sys

from arrayauth.cli import main

sys.exit(main())
