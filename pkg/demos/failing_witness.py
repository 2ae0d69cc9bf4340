"""A deliberately failing instance: z dx^dy on the (x, y, z) patch is not
closed, so mapping its graph into the standard Courant algebroid cannot
preserve the bracket. The report names the violated condition and prints
a witness with the exact residual."""

import sys

from algebroids import cli


def main():
    code = cli.main(["check", "im2form", "nonclosed-zdxdy", "--seed", "1",
                     "--format", "text"])
    print()
    print("exit status %d, as expected for a failing instance" % code)
    return 0


if __name__ == "__main__":
    sys.exit(main())
