import sys

from surfcouple.cli import main

sys.exit(main())
