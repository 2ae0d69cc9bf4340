"""Build the Courant algebroid generated by the Poisson triple on the
(x, y) patch, serialize the presentation to an instance file, and certify
the Courant axioms on the re-ingested file. The serialized presentation
is over the quotient frame, so this closes the loop: what the builder
produced is checked by the same code path as any hand-written instance."""

import os
import sys
import tempfile

from algebroids import cli


def main():
    out = os.path.join(tempfile.mkdtemp(), "manin.alg")
    code = cli.main(["build-manin", "poisson-xy", "--out", out])
    if code:
        return code
    return cli.main(["check", "courant", out, "--format", "text",
                     "--trials", "4"])


if __name__ == "__main__":
    sys.exit(main())
