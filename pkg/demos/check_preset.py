"""Export a zoo preset to an instance file, then run every applicable
check suite on the file and print the text report."""

import os
import sys
import tempfile

from algebroids import cli


def main():
    out = os.path.join(tempfile.mkdtemp(), "presymplectic.alg")
    cli.main(["zoo", "presymplectic-dxdy", "--emit", out])
    print()
    with open(out) as fh:
        print(fh.read())
    return cli.main(["check", "all", out, "--format", "text"])


if __name__ == "__main__":
    sys.exit(main())
