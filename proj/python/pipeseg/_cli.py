"""Console entry point that hands off to the bundled pipeseg executable."""

import os
import sys
from pathlib import Path


def main():
    exe = Path(__file__).with_name("bin") / "pipeseg"
    if not exe.exists():
        sys.exit(f"pipeseg executable not found at {exe}")
    os.execv(str(exe), [str(exe), *sys.argv[1:]])
