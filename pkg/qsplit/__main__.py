import sys

from qsplit.manage import main

if __name__ == '__main__':
    sys.exit(main())
