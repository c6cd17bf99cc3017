#!/usr/bin/env python3
"""
StereoNav - Entry Point
Stereo vision indoor navigation: matching, obstacle decisions, reconstruction, mapping and simulation
"""

import sys

from src.cli.app import main


if __name__ == "__main__":
    sys.exit(main())
