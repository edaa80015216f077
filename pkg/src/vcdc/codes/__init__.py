"""Bundled parity-check matrices in alist format.

Generated once by tools/make_codes.py and committed; the library never
synthesizes codes at runtime.
"""

from importlib import resources

from ..codebook import parse_alist


def available():
    """Names of the bundled codes."""
    root = resources.files(__package__)
    return sorted(p.name[:-len(".alist")] for p in root.iterdir()
                  if p.name.endswith(".alist"))

def alist_text(name):
    return resources.files(__package__).joinpath(f"{name}.alist").read_text("ascii")


def load(name):
    """Parse a bundled code into a ParityCheckMatrix."""
    return parse_alist(alist_text(name))
